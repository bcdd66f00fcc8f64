#include "percospec/cayley.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

#include "percospec/errors.hpp"
#include "percospec/rng.hpp"

namespace percospec {

namespace {

GroupElement make(std::initializer_list<std::int32_t> values) {
  GroupElement g;
  g.code.assign(values.begin(), values.end());
  return g;
}

int floor_mod(long long value, int m) {
  const long long r = value % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

// Lamps of `a` plus lamps of `b` shifted by `shift`, summed mod m.
void merge_lamps(const GroupElement::Code& a, const GroupElement::Code& b, std::int32_t shift, int m,
                 GroupElement::Code& out) {
  std::size_t i = 1, j = 1;
  while (i < a.size() || j < b.size()) {
    std::int32_t pos;
    long long value;
    if (j >= b.size() || (i < a.size() && a[i] < b[j] + shift)) {
      pos = a[i];
      value = a[i + 1];
      i += 2;
    } else if (i >= a.size() || b[j] + shift < a[i]) {
      pos = b[j] + shift;
      value = b[j + 1];
      j += 2;
    } else {
      pos = a[i];
      value = static_cast<long long>(a[i + 1]) + b[j + 1];
      i += 2;
      j += 2;
    }
    const int v = floor_mod(value, m);
    if (v != 0) {
      out.push_back(pos);
      out.push_back(v);
    }
  }
}

}  // namespace

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
  std::uint64_t h = 0x51ed270b27f2a1c3ULL ^ g.code.size();
  for (std::int32_t c : g.code) h = mix64(h ^ static_cast<std::uint32_t>(c));
  return static_cast<std::size_t>(h);
}

std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < g.code.size(); ++i) os << (i ? "," : "") << g.code[i];
  os << ')';
  return os.str();
}

GroupSpec::GroupSpec(GroupKind kind, int rank, int modulus, std::vector<GroupElement> generators,
                     bool is_default)
    : kind_(kind), rank_(rank), modulus_(modulus), generators_(std::move(generators)),
      default_generators_(is_default) {
  if (generators_.empty()) throw DomainError("generator set must not be empty");
  const GroupElement id = identity();
  for (const auto& g : generators_) {
    validate(g);
    if (g == id) throw DomainError("generator set must not contain the identity");
  }
  auto sorted = generators_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("generator set contains duplicates");
  }
  for (const auto& g : generators_) {
    if (!std::binary_search(sorted.begin(), sorted.end(), inverse(g))) {
      throw DomainError("generator set is not symmetric: missing inverse of " + to_string(g));
    }
  }
}

std::vector<GroupElement> GroupSpec::default_generator_set(GroupKind kind, int rank, int modulus) {
  std::vector<GroupElement> gens;
  switch (kind) {
    case GroupKind::FreeAbelian:
      for (int i = 0; i < rank; ++i) {
        for (int sign : {1, -1}) {
          GroupElement g;
          g.code.assign(static_cast<std::size_t>(rank), 0);
          g.code[static_cast<std::size_t>(i)] = sign;
          gens.push_back(g);
        }
      }
      break;
    case GroupKind::Heisenberg3:
      gens = {make({1, 0, 0}), make({-1, 0, 0}), make({0, 0, 1}), make({0, 0, -1})};
      break;
    case GroupKind::Lamplighter:
      for (int l = 0; l < modulus; ++l) gens.push_back(lamplighter_element(modulus, {{1, l}}, 1));
      for (int l = 0; l < modulus; ++l) gens.push_back(lamplighter_element(modulus, {{0, l}}, -1));
      break;
  }
  return gens;
}

GroupSpec GroupSpec::free_abelian(int rank) {
  if (rank < 1) throw DomainError("free abelian rank must be >= 1");
  return {GroupKind::FreeAbelian, rank, 0, default_generator_set(GroupKind::FreeAbelian, rank, 0), true};
}

GroupSpec GroupSpec::free_abelian(int rank, std::vector<GroupElement> generators) {
  if (rank < 1) throw DomainError("free abelian rank must be >= 1");
  const bool is_default = generators == default_generator_set(GroupKind::FreeAbelian, rank, 0);
  return {GroupKind::FreeAbelian, rank, 0, std::move(generators), is_default};
}

GroupSpec GroupSpec::heisenberg() {
  return {GroupKind::Heisenberg3, 3, 0, default_generator_set(GroupKind::Heisenberg3, 3, 0), true};
}

GroupSpec GroupSpec::heisenberg(std::vector<GroupElement> generators) {
  const bool is_default = generators == default_generator_set(GroupKind::Heisenberg3, 3, 0);
  return {GroupKind::Heisenberg3, 3, 0, std::move(generators), is_default};
}

GroupSpec GroupSpec::lamplighter(int modulus) {
  if (modulus < 2) throw DomainError("lamplighter modulus must be >= 2");
  return {GroupKind::Lamplighter, 0, modulus, default_generator_set(GroupKind::Lamplighter, 0, modulus),
          true};
}

GroupSpec GroupSpec::lamplighter(int modulus, std::vector<GroupElement> generators) {
  if (modulus < 2) throw DomainError("lamplighter modulus must be >= 2");
  const bool is_default = generators == default_generator_set(GroupKind::Lamplighter, 0, modulus);
  return {GroupKind::Lamplighter, 0, modulus, std::move(generators), is_default};
}

GroupElement GroupSpec::lamplighter_element(int modulus, std::vector<std::pair<int, int>> lamps, int x) {
  std::map<int, long long> acc;
  for (const auto& [pos, value] : lamps) acc[pos] += value;
  GroupElement g;
  g.code.push_back(x);
  for (const auto& [pos, value] : acc) {
    const int v = floor_mod(value, modulus);
    if (v != 0) {
      g.code.push_back(pos);
      g.code.push_back(v);
    }
  }
  return g;
}

GroupElement GroupSpec::identity() const {
  GroupElement g;
  switch (kind_) {
    case GroupKind::FreeAbelian: g.code.assign(static_cast<std::size_t>(rank_), 0); break;
    case GroupKind::Heisenberg3: g.code.assign(3, 0); break;
    case GroupKind::Lamplighter: g.code.assign(1, 0); break;
  }
  return g;
}

void GroupSpec::validate(const GroupElement& g) const {
  const auto& c = g.code;
  switch (kind_) {
    case GroupKind::FreeAbelian:
      if (static_cast<int>(c.size()) != rank_) throw DomainError("element " + to_string(g) + " has wrong rank");
      return;
    case GroupKind::Heisenberg3:
      if (c.size() != 3) throw DomainError("Heisenberg element must be a triple");
      return;
    case GroupKind::Lamplighter:
      if (c.empty() || c.size() % 2 == 0) throw DomainError("malformed lamplighter code " + to_string(g));
      for (std::size_t i = 1; i < c.size(); i += 2) {
        if (c[i + 1] <= 0 || c[i + 1] >= modulus_) {
          throw DomainError("lamp value out of range in " + to_string(g));
        }
        if (i > 1 && c[i] <= c[i - 2]) throw DomainError("lamp positions not increasing in " + to_string(g));
      }
      return;
  }
}

GroupElement GroupSpec::multiply(const GroupElement& a, const GroupElement& b) const {
  GroupElement out;
  const auto& x = a.code;
  const auto& y = b.code;
  switch (kind_) {
    case GroupKind::FreeAbelian:
      out.code.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out.code[i] = x[i] + y[i];
      break;
    case GroupKind::Heisenberg3:
      out.code = {x[0] + y[0], x[1] + y[1] + x[0] * y[2], x[2] + y[2]};
      break;
    case GroupKind::Lamplighter:
      // (phi1, x1) * (phi2, x2) = (phi1 + phi2(. - x1), x1 + x2)
      out.code.push_back(x[0] + y[0]);
      merge_lamps(x, y, x[0], modulus_, out.code);
      break;
  }
  return out;
}

GroupElement GroupSpec::inverse(const GroupElement& a) const {
  GroupElement out;
  const auto& x = a.code;
  switch (kind_) {
    case GroupKind::FreeAbelian:
      out.code.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out.code[i] = -x[i];
      break;
    case GroupKind::Heisenberg3:
      out.code = {-x[0], x[0] * x[2] - x[1], -x[2]};
      break;
    case GroupKind::Lamplighter:
      // (phi, x)^-1 = (-phi(. + x), -x)
      out.code.push_back(-x[0]);
      for (std::size_t i = 1; i < x.size(); i += 2) {
        out.code.push_back(x[i] - x[0]);
        out.code.push_back(modulus_ - x[i + 1]);
      }
      break;
  }
  return out;
}

std::string GroupSpec::name() const {
  switch (kind_) {
    case GroupKind::FreeAbelian: return "free_abelian(" + std::to_string(rank_) + ")";
    case GroupKind::Heisenberg3: return "heisenberg3";
    case GroupKind::Lamplighter: return "lamplighter(" + std::to_string(modulus_) + ")";
  }
  return "unknown";
}

Index default_vertex_budget() {
  if (const char* env = std::getenv("PERCOSPEC_BUDGET_VERTICES")) {
    char* end = nullptr;
    const long long value = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return value;
  }
  return 2'000'000;
}

// --- CayleyPatch ------------------------------------------------------------

CayleyPatch::CayleyPatch(GroupSpec spec, std::vector<GroupElement> vertices)
    : spec_(std::move(spec)), vertices_(std::move(vertices)) {
  index_.reserve(vertices_.size());
  for (Index v = 0; v < size(); ++v) {
    spec_.validate(vertices_[v]);
    if (!index_.emplace(vertices_[v], v).second) {
      throw DomainError("duplicate vertex " + to_string(vertices_[v]));
    }
  }
  build_edges();
}

CayleyPatch::CayleyPatch(GroupSpec spec, std::vector<GroupElement> vertices, IndexMap index)
    : spec_(std::move(spec)), vertices_(std::move(vertices)), index_(std::move(index)) {
  build_edges();
}

void CayleyPatch::build_edges() {
  for (Index u = 0; u < size(); ++u) {
    for (const auto& g : spec_.generators()) {
      if (auto v = find(spec_.multiply(vertices_[u], g)); v && u < *v) edges_.emplace_back(u, *v);
    }
  }
  std::sort(edges_.begin(), edges_.end());
  adjacency_ = Adjacency::from_edges(size(), edges_);
}

std::optional<Index> CayleyPatch::find(const GroupElement& g) const {
  if (auto it = index_.find(g); it != index_.end()) return it->second;
  return std::nullopt;
}

// --- balls and growth ---------------------------------------------------------

CayleyBall::CayleyBall(GroupSpec spec, std::vector<GroupElement> vertices, IndexMap index, int radius,
                       std::vector<int> word_length)
    : CayleyPatch(std::move(spec), std::move(vertices), std::move(index)), radius_(radius),
      word_length_(std::move(word_length)) {
  volumes_.assign(static_cast<std::size_t>(radius_) + 1, 0);
  for (int w : word_length_) ++volumes_[static_cast<std::size_t>(w)];
  for (int r = 1; r <= radius_; ++r) volumes_[r] += volumes_[r - 1];
}

CayleyBall enumerate_ball(const GroupSpec& spec, int radius, Index budget) {
  if (radius < 0) throw DomainError("ball radius must be >= 0");
  std::vector<GroupElement> vertices{spec.identity()};
  std::vector<int> word_length{0};
  std::unordered_map<GroupElement, Index, GroupElementHash> index;
  index.emplace(vertices.front(), 0);
  std::size_t layer_begin = 0;
  for (int r = 1; r <= radius; ++r) {
    const std::size_t layer_end = vertices.size();
    std::vector<GroupElement> next;
    for (std::size_t v = layer_begin; v < layer_end; ++v) {
      for (const auto& g : spec.generators()) {
        GroupElement y = spec.multiply(vertices[v], g);
        if (index.try_emplace(y, -1).second) {
          next.push_back(std::move(y));
          if (static_cast<Index>(vertices.size() + next.size()) > budget) {
            throw ResourceError("ball B(" + std::to_string(radius) + ") of " + spec.name() +
                                " exceeds the vertex budget of " + std::to_string(budget) +
                                " (PERCOSPEC_BUDGET_VERTICES)");
          }
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (auto& y : next) {
      index[y] = static_cast<Index>(vertices.size());
      vertices.push_back(std::move(y));
      word_length.push_back(r);
    }
    layer_begin = layer_end;
  }
  return CayleyBall(spec, std::move(vertices), std::move(index), radius, std::move(word_length));
}

int GrowthProfile::phi(double t) const {
  const auto it = std::upper_bound(volume.begin(), volume.end(), t,
                                   [](double value, Index v) { return value < static_cast<double>(v); });
  if (it == volume.end()) {
    throw DomainError("phi(" + std::to_string(t) + ") exceeds the tabulated growth range");
  }
  return static_cast<int>(it - volume.begin());
}

GrowthProfile growth_profile(const GroupSpec& spec, int n_max, Index budget) {
  if (n_max < 2) throw DomainError("growth profile needs n_max >= 2");
  return GrowthProfile{enumerate_ball(spec, n_max, budget).volumes()};
}

// --- finite subgraphs ---------------------------------------------------------

FiniteSubgraph::FiniteSubgraph(GroupSpec spec, std::vector<GroupElement> vertices, std::vector<Index> parent_index)
    : CayleyPatch(std::move(spec), std::move(vertices)), parent_index_(std::move(parent_index)) {
  connected_ = size() > 0 && connected_components(adjacency()).count() == 1;
}

FiniteSubgraph induced_subgraph(const CayleyBall& ball, std::vector<Index> subset) {
  std::vector<GroupElement> elements;
  elements.reserve(subset.size());
  for (Index v : subset) {
    if (v < 0 || v >= ball.size()) throw DomainError("subset index outside the ball");
    elements.push_back(ball.element(v));
  }
  return FiniteSubgraph(ball.spec(), std::move(elements), std::move(subset));
}

FiniteSubgraph ball_subgraph(const CayleyBall& ball, int r) {
  if (r < 0 || r > ball.radius()) throw DomainError("ball_subgraph radius outside the enumerated ball");
  std::vector<Index> subset(static_cast<std::size_t>(ball.volumes()[r]));
  for (Index v = 0; v < static_cast<Index>(subset.size()); ++v) subset[v] = v;
  return induced_subgraph(ball, std::move(subset));
}

namespace {

std::vector<GroupElement> generator_powers(const GroupSpec& spec, Index n) {
  if (n < 1) throw DomainError("line length must be >= 1");
  const GroupElement& g = spec.generators().front();
  const GroupElement g_inv = spec.inverse(g);
  const Index lo = (n - 1) / 2;
  const Index hi = n - 1 - lo;
  std::vector<GroupElement> left, elements;
  GroupElement cur = spec.identity();
  for (Index j = 0; j < lo; ++j) left.push_back(cur = spec.multiply(cur, g_inv));
  elements.assign(left.rbegin(), left.rend());
  cur = spec.identity();
  elements.push_back(cur);
  for (Index j = 0; j < hi; ++j) elements.push_back(cur = spec.multiply(cur, g));
  auto sorted = elements;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("first generator has finite order; no line of length " + std::to_string(n));
  }
  return elements;
}

}  // namespace

FiniteSubgraph line_subgraph(const CayleyBall& ball, Index n) {
  auto elements = generator_powers(ball.spec(), n);
  std::vector<Index> parent;
  for (const auto& e : elements) {
    auto v = ball.find(e);
    if (!v) throw DomainError("line L_" + std::to_string(n) + " does not fit in B(" + std::to_string(ball.radius()) + ")");
    parent.push_back(*v);
  }
  return FiniteSubgraph(ball.spec(), std::move(elements), std::move(parent));
}

FiniteSubgraph line_subgraph(const GroupSpec& spec, Index n) {
  return FiniteSubgraph(spec, generator_powers(spec, n));
}

std::vector<GroupElement> tetrahedron_elements(int modulus, int depth) {
  if (modulus < 2) throw DomainError("lamplighter modulus must be >= 2");
  if (depth < 1) throw DomainError("tetrahedron depth must be >= 1");
  Index configurations = 1;
  for (int i = 0; i < depth; ++i) configurations *= modulus;
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(configurations * (depth + 1)));
  for (int x = 0; x <= depth; ++x) {
    for (Index c = 0; c < configurations; ++c) {
      // base-m digits of c, most significant first, are the lamps at 1..depth
      GroupElement g;
      g.code.push_back(x);
      std::vector<std::int32_t> digits(static_cast<std::size_t>(depth));
      Index rest = c;
      for (int i = depth - 1; i >= 0; --i) {
        digits[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(rest % modulus);
        rest /= modulus;
      }
      for (int pos = 1; pos <= depth; ++pos) {
        if (const auto v = digits[static_cast<std::size_t>(pos - 1)]; v != 0) {
          g.code.push_back(pos);
          g.code.push_back(v);
        }
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

FiniteSubgraph tetrahedron(int modulus, int depth) {
  return FiniteSubgraph(GroupSpec::lamplighter(modulus), tetrahedron_elements(modulus, depth));
}

FiniteSubgraph tetrahedron(int modulus, int depth, const CayleyBall& ball) {
  if (!(ball.spec() == GroupSpec::lamplighter(modulus))) {
    throw DomainError("tetrahedron requires a lamplighter(" + std::to_string(modulus) + ") ball with generators S_0");
  }
  auto elements = tetrahedron_elements(modulus, depth);
  std::vector<Index> parent;
  parent.reserve(elements.size());
  for (const auto& e : elements) {
    auto v = ball.find(e);
    if (!v) {
      throw DomainError("tetrahedron T_" + std::to_string(depth) + " does not fit in B(" +
                        std::to_string(ball.radius()) + ")");
    }
    parent.push_back(*v);
  }
  return FiniteSubgraph(ball.spec(), std::move(elements), std::move(parent));
}

std::vector<GroupElement> thicken(const GroupSpec& spec, const std::vector<GroupElement>& elements, int R) {
  if (R < 0) throw DomainError("thickening radius must be >= 0");
  std::unordered_map<GroupElement, int, GroupElementHash> seen;
  std::vector<GroupElement> out;
  std::queue<std::pair<GroupElement, int>> queue;
  for (const auto& e : elements) {
    if (seen.emplace(e, 0).second) {
      out.push_back(e);
      queue.emplace(e, 0);
    }
  }
  while (!queue.empty()) {
    auto [x, d] = queue.front();
    queue.pop();
    if (d == R) continue;
    for (const auto& g : spec.generators()) {
      GroupElement y = spec.multiply(x, g);
      if (seen.emplace(y, d + 1).second) {
        out.push_back(y);
        queue.emplace(std::move(y), d + 1);
      }
    }
  }
  return out;
}

std::vector<Index> inner_vertex_boundary(const CayleyPatch& patch) {
  std::vector<Index> out;
  for (Index v = 0; v < patch.size(); ++v) {
    if (patch.adjacency().degree(v) < patch.degree()) out.push_back(v);
  }
  return out;
}

Bipartition is_bipartite(const CayleyPatch& patch) { return two_colouring(patch.adjacency()); }

void write_edge_list(std::ostream& out, const CayleyBall& ball) {
  out << "# group=" << ball.spec().name() << " n=" << ball.radius() << " k=" << ball.degree() << '\n';
  for (const auto& [u, v] : ball.edges()) out << u << ' ' << v << '\n';
}

}  // namespace percospec
