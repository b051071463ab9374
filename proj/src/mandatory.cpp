#include "morseunc/mandatory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <json.hpp>

namespace morseunc {

namespace {

// Lexicographic (value, vertex) key; larger means higher.
struct Key {
  float value;
  VertexId vertex;
  bool operator<(const Key& o) const { return value < o.value || (value == o.value && vertex < o.vertex); }
  bool operator==(const Key&) const = default;
};

struct Event {
  Key key;
  bool query;  // false: activate vertex at its upper value; true: test vertex at its lower value
};

}  // namespace

std::vector<MandatoryMaximum> mandatory_maxima(const ScalarGrid& lower, const ScalarGrid& upper,
                                               const GridTopology& topo, double cleanup_persistence) {
  if (!lower.same_shape(upper) || topo.width() != lower.width() || topo.height() != lower.height()) {
    throw ArgumentError("bound fields and topology differ in shape");
  }
  if (!(cleanup_persistence >= 0.0)) throw ArgumentError("cleanup persistence must be >= 0");
  const std::size_t n = lower.size();
  for (VertexId v = 0; v < n; ++v) {
    if (lower[v] > upper[v]) {
      throw ArgumentError("lower bound exceeds upper bound at vertex " + std::to_string(v));
    }
  }

  std::vector<Event> events;
  events.reserve(2 * n);
  for (VertexId v = 0; v < n; ++v) {
    events.push_back({{upper[v], v}, false});
    events.push_back({{lower[v], v}, true});
  }
  // Descending keys; an activation precedes the query with the identical key.
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (!(a.key == b.key)) return b.key < a.key;
    return !a.query && b.query;
  });

  constexpr VertexId kInactive = ~VertexId{0};
  std::vector<VertexId> parent(n, kInactive);
  std::vector<VertexId> best(n);  // per root: vertex with the largest lower key in the component
  auto find = [&](VertexId v) {
    VertexId root = v;
    while (parent[root] != root) root = parent[root];
    while (parent[v] != root) v = std::exchange(parent[v], root);
    return root;
  };
  auto lower_key = [&](VertexId v) { return Key{lower[v], v}; };

  std::vector<VertexId> anchors;
  std::vector<char> is_anchor(n, 0);
  std::vector<double> margin(n, std::numeric_limits<double>::infinity());

  for (const Event& e : events) {
    const VertexId v = e.key.vertex;
    if (e.query) {
      if (best[find(v)] == v) {
        anchors.push_back(v);
        is_anchor[v] = 1;
      }
      continue;
    }
    parent[v] = v;
    best[v] = v;
    topo.for_each_neighbor(v, [&](VertexId u, int) {
      if (parent[u] == kInactive) return;
      const VertexId a = find(u), b = find(v);
      if (a == b) return;
      const bool a_wins = lower_key(best[b]) < lower_key(best[a]);
      const VertexId loser = a_wins ? b : a;
      const VertexId winner = a_wins ? a : b;
      if (is_anchor[best[loser]]) margin[best[loser]] = double(lower[best[loser]]) - double(upper[v]);
      parent[loser] = winner;
    });
  }

  std::vector<MandatoryMaximum> out;
  for (VertexId x : anchors) {
    if (margin[x] < cleanup_persistence) continue;
    MandatoryMaximum m;
    m.anchor = x;
    m.low = lower[x];
    m.margin = margin[x];
    const Key threshold = lower_key(x);
    std::vector<char> seen(n, 0);
    std::queue<VertexId> q;
    q.push(x);
    seen[x] = 1;
    double high = upper[x];
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      m.region.push_back(v);
      high = std::max(high, double(upper[v]));
      topo.for_each_neighbor(v, [&](VertexId u, int) {
        if (!seen[u] && !(Key{upper[u], u} < threshold)) {
          seen[u] = 1;
          q.push(u);
        }
      });
    }
    std::sort(m.region.begin(), m.region.end());
    m.high = high;
    out.push_back(std::move(m));
  }
  // Anchors were found in descending key order already.
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = static_cast<std::uint32_t>(i);
  return out;
}

std::vector<std::int32_t> region_mask(const std::vector<MandatoryMaximum>& mandatory, std::size_t vertex_count) {
  std::vector<std::int32_t> mask(vertex_count, -1);
  for (const auto& m : mandatory) {
    for (VertexId v : m.region) {
      if (v >= vertex_count) throw ArgumentError("mandatory region outside the grid");
      mask[v] = static_cast<std::int32_t>(m.label);
    }
  }
  return mask;
}

std::map<VertexId, std::uint32_t> label_member_maxima(const Segmentation& seg,
                                                      const std::vector<MandatoryMaximum>& mandatory) {
  if (mandatory.empty()) throw ArgumentError("no mandatory maxima to label against");
  const std::size_t w = seg.width;
  const auto mask = region_mask(mandatory, seg.labels.size());
  std::map<VertexId, std::uint32_t> out;
  for (VertexId m : seg.maxima) {
    if (mask[m] >= 0) {
      out[m] = static_cast<std::uint32_t>(mask[m]);
      continue;
    }
    const double r = double(m / w), c = double(m % w);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t label = 0;
    for (const auto& mm : mandatory) {
      double d = std::numeric_limits<double>::infinity();
      for (VertexId v : mm.region) {
        const double dr = double(v / w) - r, dc = double(v % w) - c;
        d = std::min(d, dr * dr + dc * dc);
      }
      if (d < best || (d == best && mm.label < label)) {
        best = d;
        label = mm.label;
      }
    }
    out[m] = label;
  }
  return out;
}

Clustering cluster_maxima_fallback(const std::vector<Point2>& points, std::size_t l, std::uint64_t seed) {
  if (l == 0) throw ArgumentError("cluster count must be positive");
  if (points.size() < l) {
    throw ArgumentError("need at least " + std::to_string(l) + " points, got " + std::to_string(points.size()));
  }
  const std::size_t n = points.size();
  auto before = [](const Point2& a, const Point2& b) { return a.row < b.row || (a.row == b.row && a.col < b.col); };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return before(points[a], points[b]); });
  std::vector<Point2> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = points[order[i]];
  auto dist2 = [](const Point2& a, const Point2& b) {
    const double dr = a.row - b.row, dc = a.col - b.col;
    return dr * dr + dc * dc;
  };

  std::vector<Point2> centers{p[seed % n]};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(p[i], centers[0]);
  while (centers.size() < l) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (nearest[i] > nearest[far]) far = i;
    centers.push_back(p[far]);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist2(p[i], p[far]));
  }

  std::vector<std::uint32_t> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t k = 0;
      for (std::uint32_t j = 1; j < l; ++j)
        if (dist2(p[i], centers[j]) < dist2(p[i], centers[k])) k = j;
      changed = changed || k != assign[i];
      assign[i] = k;
    }
    if (!changed) break;
    std::vector<Point2> sum(l, {0.0, 0.0});
    std::vector<std::size_t> count(l, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]].row += p[i].row;
      sum[assign[i]].col += p[i].col;
      ++count[assign[i]];
    }
    for (std::size_t j = 0; j < l; ++j) {
      if (count[j] > 0) centers[j] = {sum[j].row / double(count[j]), sum[j].col / double(count[j])};
    }
  }

  std::vector<std::uint32_t> rank(l);
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](std::uint32_t a, std::uint32_t b) {
    return before(centers[a], centers[b]) || (!before(centers[b], centers[a]) && a < b);
  });
  std::vector<std::uint32_t> relabel(l);
  Clustering out;
  for (std::uint32_t j = 0; j < l; ++j) {
    relabel[rank[j]] = j;
    out.centers.push_back(centers[rank[j]]);
  }
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.assignment[order[i]] = relabel[assign[i]];
  return out;
}

std::string mandatory_to_json(const std::vector<MandatoryMaximum>& mandatory, std::size_t width, int indent) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& m : mandatory) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < m.region.size();) {
      std::size_t j = i + 1;
      while (j < m.region.size() && m.region[j] == m.region[j - 1] + 1) ++j;
      runs.push_back({m.region[i], j - i});
      i = j;
    }
    nlohmann::json item{{"label", m.label},
                        {"anchor", {m.anchor / width, m.anchor % width}},
                        {"interval", {m.low, m.high}},
                        {"region_rle", std::move(runs)}};
    item["margin"] = std::isfinite(m.margin) ? nlohmann::json(m.margin) : nlohmann::json(nullptr);
    doc.push_back(std::move(item));
  }
  return doc.dump(indent);
}

std::vector<MandatoryMaximum> mandatory_from_json(const std::string& text, std::size_t width) {
  std::vector<MandatoryMaximum> out;
  try {
    for (const auto& item : nlohmann::json::parse(text)) {
      MandatoryMaximum m;
      m.label = item.at("label").get<std::uint32_t>();
      m.anchor = static_cast<VertexId>(item.at("anchor").at(0).get<std::size_t>() * width +
                                       item.at("anchor").at(1).get<std::size_t>());
      m.low = item.at("interval").at(0).get<double>();
      m.high = item.at("interval").at(1).get<double>();
      for (const auto& run : item.at("region_rle")) {
        const auto start = run.at(0).get<VertexId>();
        const auto length = run.at(1).get<VertexId>();
        for (VertexId k = 0; k < length; ++k) m.region.push_back(start + k);
      }
      if (item.contains("margin") && !item["margin"].is_null()) m.margin = item["margin"].get<double>();
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed mandatory maxima JSON: ") + e.what());
  }
  return out;
}

}  // namespace morseunc
