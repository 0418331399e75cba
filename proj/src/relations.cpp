#include "tlsys/relations.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

namespace tlsys {

// ---------------------------------------------------------------------------
// Atom / FiniteSet

std::int64_t Atom::as_integer() const {
  if (!is_integer()) fail(ErrorCode::NonNumericLabel, "atom '" + std::get<std::string>(value_) + "' is not an integer");
  return std::get<std::int64_t>(value_);
}

const std::string& Atom::as_symbol() const {
  if (is_integer()) fail(ErrorCode::InvalidSpec, "atom " + to_string() + " is not a symbol");
  return std::get<std::string>(value_);
}

std::string Atom::to_string() const {
  if (is_integer()) return std::to_string(std::get<std::int64_t>(value_));
  return std::get<std::string>(value_);
}

FiniteSet::FiniteSet(std::string name, std::vector<Atom> elements) : name_(std::move(name)), elements_(std::move(elements)) {
  if (elements_.empty()) fail(ErrorCode::EmptyComponent, "set '" + name_ + "' is empty");
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!index_.emplace(elements_[i], i).second)
      fail(ErrorCode::DuplicateElement, "set '" + name_ + "' repeats element " + elements_[i].to_string());
  }
}

std::optional<std::size_t> FiniteSet::find(const Atom& a) const {
  auto it = index_.find(a);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FiniteSet::index_of(const Atom& a) const {
  auto i = find(a);
  if (!i) fail(ErrorCode::UnknownElement, "element " + a.to_string() + " not in set '" + name_ + "'");
  return *i;
}

bool FiniteSet::same_element_set(const FiniteSet& other) const {
  if (size() != other.size()) return false;
  return std::all_of(elements_.begin(), elements_.end(), [&](const Atom& a) { return other.find(a).has_value(); });
}

FiniteSet integer_range(std::string name, std::size_t n) {
  std::vector<Atom> elems;
  elems.reserve(n);
  for (std::size_t i = 0; i < n; ++i) elems.emplace_back(static_cast<std::int64_t>(i));
  return FiniteSet(std::move(name), std::move(elems));
}

// ---------------------------------------------------------------------------
// FiniteSystem

namespace {

void validate_partition(const IoPartition& io, std::size_t arity) {
  std::vector<int> seen(arity, 0);
  for (auto i : io.inputs) {
    if (i >= arity) fail(ErrorCode::NotAPartition, "input index " + std::to_string(i) + " out of range");
    ++seen[i];
  }
  for (auto i : io.outputs) {
    if (i >= arity) fail(ErrorCode::NotAPartition, "output index " + std::to_string(i) + " out of range");
    ++seen[i];
  }
  if (io.inputs.empty()) fail(ErrorCode::NotAPartition, "input side is empty");
  if (io.outputs.empty()) fail(ErrorCode::NotAPartition, "output side is empty");
  for (std::size_t i = 0; i < arity; ++i) {
    if (seen[i] != 1) fail(ErrorCode::NotAPartition, "component " + std::to_string(i) + " is not covered exactly once");
  }
}

}  // namespace

FiniteSystem::FiniteSystem(std::vector<FiniteSet> components, std::set<Tuple> tuples, std::optional<IoPartition> io)
    : components_(std::move(components)), tuples_(std::move(tuples)), io_(std::move(io)) {
  if (components_.empty()) fail(ErrorCode::EmptyComponent, "system has no components");
  for (const auto& t : tuples_) {
    if (t.size() != components_.size())
      fail(ErrorCode::ArityMismatch,
           "tuple of arity " + std::to_string(t.size()) + " in system of arity " + std::to_string(components_.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= components_[i].size())
        fail(ErrorCode::UnknownElement,
             "index " + std::to_string(t[i]) + " out of range for component '" + components_[i].name() + "'");
    }
  }
  if (io_) validate_partition(*io_, components_.size());
}

const IoPartition& FiniteSystem::io() const {
  if (!io_) fail(ErrorCode::NoPartition, "system has no input-output partition");
  return *io_;
}

std::size_t FiniteSystem::input_cardinality() const {
  std::size_t n = 1;
  for (auto i : io().inputs) n *= components_[i].size();
  return n;
}

std::size_t FiniteSystem::output_cardinality() const {
  std::size_t n = 1;
  for (auto i : io().outputs) n *= components_[i].size();
  return n;
}

std::size_t FiniteSystem::flatten(const Tuple& t, const std::vector<std::size_t>& idx) const {
  std::size_t v = 0;
  for (auto i : idx) v = v * components_[i].size() + t.at(i);
  return v;
}

std::vector<std::size_t> FiniteSystem::unflatten(std::size_t v, const std::vector<std::size_t>& idx) const {
  std::vector<std::size_t> out(idx.size());
  for (std::size_t k = idx.size(); k-- > 0;) {
    const auto n = components_[idx[k]].size();
    out[k] = v % n;
    v /= n;
  }
  return out;
}

std::string FiniteSystem::label(std::size_t v, const std::vector<std::size_t>& idx) const {
  const auto parts = unflatten(v, idx);
  if (parts.size() == 1) return components_[idx[0]][parts[0]].to_string();
  std::string s = "(";
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) s += ",";
    s += components_[idx[k]][parts[k]].to_string();
  }
  return s + ")";
}

std::size_t FiniteSystem::input_index(const Tuple& t) const { return flatten(t, io().inputs); }
std::size_t FiniteSystem::output_index(const Tuple& t) const { return flatten(t, io().outputs); }
std::vector<std::size_t> FiniteSystem::decode_input(std::size_t x) const { return unflatten(x, io().inputs); }
std::vector<std::size_t> FiniteSystem::decode_output(std::size_t y) const { return unflatten(y, io().outputs); }
std::string FiniteSystem::input_label(std::size_t x) const { return label(x, io().inputs); }
std::string FiniteSystem::output_label(std::size_t y) const { return label(y, io().outputs); }

std::vector<IoPair> FiniteSystem::io_pairs() const {
  std::set<IoPair> pairs;
  for (const auto& t : tuples_) pairs.emplace(input_index(t), output_index(t));
  return {pairs.begin(), pairs.end()};
}

AtomTuple FiniteSystem::atoms_of(const Tuple& t) const {
  AtomTuple out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back(components_.at(i)[t[i]]);
  return out;
}

FiniteSystem make_system(std::vector<FiniteSet> components, const std::vector<AtomTuple>& tuples) {
  if (components.empty()) fail(ErrorCode::EmptyComponent, "system has no components");
  std::set<Tuple> idx;
  for (const auto& t : tuples) {
    if (t.size() != components.size())
      fail(ErrorCode::ArityMismatch,
           "tuple of arity " + std::to_string(t.size()) + " in system of arity " + std::to_string(components.size()));
    Tuple row(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) row[i] = components[i].index_of(t[i]);
    idx.insert(std::move(row));
  }
  return FiniteSystem(std::move(components), std::move(idx));
}

FiniteSystem as_input_output(const FiniteSystem& s, const std::vector<std::size_t>& input_indices) {
  IoPartition io;
  std::set<std::size_t> in(input_indices.begin(), input_indices.end());
  if (in.size() != input_indices.size()) fail(ErrorCode::NotAPartition, "input indices overlap");
  for (auto i : in) {
    if (i >= s.arity()) fail(ErrorCode::NotAPartition, "input index " + std::to_string(i) + " out of range");
  }
  io.inputs.assign(in.begin(), in.end());
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (!in.count(i)) io.outputs.push_back(i);
  }
  return FiniteSystem(s.components(), s.tuples(), io);
}

bool is_function_type(const FiniteSystem& s) {
  (void)s.io();
  std::map<std::size_t, std::size_t> seen;
  for (const auto& [x, y] : s.io_pairs()) {
    auto [it, inserted] = seen.emplace(x, y);
    if (!inserted && it->second != y) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Cascade

FiniteSystem cascade(const FiniteSystem& s1, const FiniteSystem& s2, const Coupling& coupling) {
  const auto& io1 = s1.io();
  const auto& io2 = s2.io();
  if (coupling.first_outputs.empty() || coupling.first_outputs.size() != coupling.second_inputs.size())
    fail(ErrorCode::CouplingMismatch, "coupling must pair at least one component on each side");

  const auto contains = [](const std::vector<std::size_t>& v, std::size_t i) {
    return std::find(v.begin(), v.end(), i) != v.end();
  };
  // translate[k][e1] = index in s2's component of s1's element e1
  std::vector<std::vector<std::size_t>> translate;
  for (std::size_t k = 0; k < coupling.first_outputs.size(); ++k) {
    const auto c1 = coupling.first_outputs[k];
    const auto c2 = coupling.second_inputs[k];
    if (!contains(io1.outputs, c1)) fail(ErrorCode::CouplingMismatch, "coupling component is not an output of the first system");
    if (!contains(io2.inputs, c2)) fail(ErrorCode::CouplingMismatch, "coupling component is not an input of the second system");
    const auto& z1 = s1.component(c1);
    const auto& z2 = s2.component(c2);
    if (!z1.same_element_set(z2))
      fail(ErrorCode::CouplingMismatch, "coupling sets '" + z1.name() + "' and '" + z2.name() + "' differ");
    std::vector<std::size_t> tr(z1.size());
    for (std::size_t e = 0; e < z1.size(); ++e) tr[e] = z2.index_of(z1[e]);
    translate.push_back(std::move(tr));
  }

  std::vector<std::size_t> x1 = io1.inputs, x2, y1, y2 = io2.outputs;
  for (auto i : io2.inputs)
    if (!contains(coupling.second_inputs, i)) x2.push_back(i);
  for (auto i : io1.outputs)
    if (!contains(coupling.first_outputs, i)) y1.push_back(i);

  std::vector<FiniteSet> comps;
  for (auto i : x1) comps.push_back(s1.component(i));
  for (auto i : x2) comps.push_back(s2.component(i));
  for (auto i : y1) comps.push_back(s1.component(i));
  for (auto i : y2) comps.push_back(s2.component(i));

  // index s2 by the coupling coordinates
  std::map<Tuple, std::vector<const Tuple*>> by_z;
  for (const auto& t2 : s2.tuples()) {
    Tuple key;
    for (auto c : coupling.second_inputs) key.push_back(t2[c]);
    by_z[key].push_back(&t2);
  }

  std::set<Tuple> out;
  for (const auto& t1 : s1.tuples()) {
    Tuple key;
    for (std::size_t k = 0; k < coupling.first_outputs.size(); ++k) key.push_back(translate[k][t1[coupling.first_outputs[k]]]);
    auto it = by_z.find(key);
    if (it == by_z.end()) continue;
    for (const Tuple* t2 : it->second) {
      Tuple row;
      row.reserve(comps.size());
      for (auto i : x1) row.push_back(t1[i]);
      for (auto i : x2) row.push_back((*t2)[i]);
      for (auto i : y1) row.push_back(t1[i]);
      for (auto i : y2) row.push_back((*t2)[i]);
      out.insert(std::move(row));
    }
  }

  IoPartition io;
  const auto n_in = x1.size() + x2.size();
  for (std::size_t i = 0; i < comps.size(); ++i) (i < n_in ? io.inputs : io.outputs).push_back(i);
  return FiniteSystem(std::move(comps), std::move(out), io);
}

// ---------------------------------------------------------------------------
// Goal-seeking

namespace {

void require_same(const FiniteSet& a, const FiniteSet& b, const char* what) {
  if (!a.same_elements(b))
    fail(ErrorCode::IncompatibleCarriers, std::string(what) + " carriers '" + a.name() + "' and '" + b.name() + "' differ");
}

void require_arity(const FiniteSystem& s, std::size_t n, const char* what) {
  if (s.arity() != n)
    fail(ErrorCode::IncompatibleCarriers, std::string(what) + " must have " + std::to_string(n) + " components");
}

}  // namespace

GoalSeekingReport check_goal_seeking(const FiniteSystem& sf, const FiniteSystem& sg, const GoalSeekingSpec& gs,
                                     const FiniteSystem* s) {
  const bool io_form = gs.form == GoalSeekingForm::input_output;
  require_arity(sf, 3, "functional system");
  require_arity(sg, io_form ? 3 : 2, "goal-seeking system");
  require_arity(gs.goal, io_form ? 4 : 3, "goal relation");
  require_arity(gs.seek, io_form ? 4 : 3, "seeking relation");
  if (s) require_arity(*s, io_form ? 2 : 3, "system");

  const FiniteSet& theta = sf.component(0);
  const FiniteSet& xs = sf.component(1);
  const FiniteSet& ys = sf.component(2);
  const FiniteSet& vs = gs.value_set;

  // Situations are (x, y) pairs in the input-output form and datasets d in
  // the learning form; both are flattened to a single index w.
  std::size_t n_w = 0;
  if (io_form) {
    require_same(sg.component(0), xs, "X");
    require_same(sg.component(1), ys, "Y");
    require_same(sg.component(2), theta, "Theta");
    require_same(gs.goal.component(0), theta, "Theta");
    require_same(gs.goal.component(1), xs, "X");
    require_same(gs.goal.component(2), ys, "Y");
    require_same(gs.goal.component(3), vs, "V");
    require_same(gs.seek.component(0), xs, "X");
    require_same(gs.seek.component(1), ys, "Y");
    require_same(gs.seek.component(2), vs, "V");
    require_same(gs.seek.component(3), theta, "Theta");
    if (s) {
      require_same(s->component(0), xs, "X");
      require_same(s->component(1), ys, "Y");
    }
    n_w = xs.size() * ys.size();
  } else {
    const FiniteSet& ds = sg.component(0);
    require_same(sg.component(1), theta, "Theta");
    require_same(gs.goal.component(0), ds, "D");
    require_same(gs.goal.component(1), theta, "Theta");
    require_same(gs.goal.component(2), vs, "V");
    require_same(gs.seek.component(0), vs, "V");
    require_same(gs.seek.component(1), ds, "D");
    require_same(gs.seek.component(2), theta, "Theta");
    if (s) {
      require_same(s->component(0), ds, "D");
      require_same(s->component(1), xs, "X");
      require_same(s->component(2), ys, "Y");
    }
    n_w = ds.size();
  }

  const auto w_atoms = [&](std::size_t w) -> AtomTuple {
    if (io_form) return {xs[w / ys.size()], ys[w % ys.size()]};
    return {sg.component(0)[w]};
  };
  const auto sg_has = [&](std::size_t w, std::size_t t) {
    if (io_form) return sg.contains({w / ys.size(), w % ys.size(), t});
    return sg.contains({w, t});
  };
  const auto seek_has = [&](std::size_t w, std::size_t v, std::size_t t) {
    if (io_form) return gs.seek.contains({w / ys.size(), w % ys.size(), v, t});
    return gs.seek.contains({v, w, t});
  };

  // goal values keyed by (w, θ)
  std::vector<std::vector<std::size_t>> goal_values(n_w * theta.size());
  for (const auto& g : gs.goal.tuples()) {
    std::size_t w, t, v;
    if (io_form) {
      t = g[0];
      w = g[1] * ys.size() + g[2];
      v = g[3];
    } else {
      w = g[0];
      t = g[1];
      v = g[2];
    }
    goal_values[w * theta.size() + t].push_back(v);
  }

  GoalSeekingReport report;
  for (std::size_t w = 0; w < n_w; ++w) {
    for (std::size_t t = 0; t < theta.size(); ++t) {
      auto witness = w_atoms(w);
      witness.push_back(theta[t]);
      const auto& vals = goal_values[w * theta.size() + t];
      if (vals.size() != 1) {
        report.violations.push_back({"goal", witness,
                                     vals.empty() ? "goal undefined" : "goal assigns several values"});
        continue;
      }
      const bool in_seek = seek_has(w, vals[0], t);
      const bool in_sg = sg_has(w, t);
      if (in_seek != in_sg) {
        report.violations.push_back(
            {"seeking", witness,
             in_seek ? "seeking relation selects a parameter the inductive system does not"
                     : "inductive system selects a parameter the seeking relation does not"});
      }
    }
  }

  if (s) {
    if (io_form) {
      for (std::size_t x = 0; x < xs.size(); ++x) {
        for (std::size_t y = 0; y < ys.size(); ++y) {
          bool rhs = false;
          for (std::size_t t = 0; t < theta.size() && !rhs; ++t) rhs = sf.contains({t, x, y}) && sg.contains({x, y, t});
          if (rhs != s->contains({x, y}))
            report.violations.push_back(
                {"functional", {xs[x], ys[y]}, rhs ? "pair missing from system" : "pair not produced by any parameter"});
        }
      }
    } else {
      const FiniteSet& ds = sg.component(0);
      for (std::size_t d = 0; d < ds.size(); ++d) {
        for (std::size_t x = 0; x < xs.size(); ++x) {
          for (std::size_t y = 0; y < ys.size(); ++y) {
            bool rhs = false;
            for (std::size_t t = 0; t < theta.size() && !rhs; ++t) rhs = sf.contains({t, x, y}) && sg.contains({d, t});
            if (rhs != s->contains({d, x, y}))
              report.violations.push_back({"functional", {ds[d], xs[x], ys[y]},
                                           rhs ? "triple missing from system" : "triple not produced by any parameter"});
          }
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Morphisms

bool MapTable::total() const {
  return std::all_of(image.begin(), image.end(), [](const auto& v) { return v.has_value(); });
}

bool MapTable::injective() const {
  std::vector<bool> hit(codomain_size, false);
  for (const auto& v : image) {
    if (!v) continue;
    if (hit[*v]) return false;
    hit[*v] = true;
  }
  return true;
}

bool MapTable::surjective() const {
  std::vector<bool> hit(codomain_size, false);
  for (const auto& v : image)
    if (v) hit[*v] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

bool MapTable::identity() const {
  if (domain_size() != codomain_size) return false;
  for (std::size_t i = 0; i < image.size(); ++i)
    if (image[i] != i) return false;
  return true;
}

MapTable MapTable::total_map(std::vector<std::size_t> values, std::size_t codomain_size) {
  MapTable m;
  m.codomain_size = codomain_size;
  for (auto v : values) {
    if (v >= codomain_size) fail(ErrorCode::UnknownElement, "map value out of codomain range");
    m.image.emplace_back(v);
  }
  return m;
}

MapTable MapTable::identity_map(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return total_map(std::move(v), n);
}

MapProperties properties_of(const MapTable& m) {
  MapProperties p;
  p.total = m.total();
  p.partial = !p.total;
  p.injective = m.injective();
  p.surjective = m.surjective();
  p.invertible = p.total && p.injective && p.surjective;
  return p;
}

MorphismProperties Morphism::properties() const {
  MorphismProperties mp{properties_of(x_map), properties_of(y_map), {}};
  mp.joint.total = mp.x.total && mp.y.total;
  mp.joint.partial = mp.x.partial || mp.y.partial;
  mp.joint.injective = mp.x.injective && mp.y.injective;
  mp.joint.surjective = mp.x.surjective && mp.y.surjective;
  mp.joint.invertible = mp.x.invertible && mp.y.invertible;
  return mp;
}

bool is_relation_preserving(const FiniteSystem& s, const FiniteSystem& s_prime, const Morphism& m,
                            bool reflect_membership) {
  if (m.x_map.domain_size() != s.input_cardinality() || m.y_map.domain_size() != s.output_cardinality() ||
      m.x_map.codomain_size != s_prime.input_cardinality() || m.y_map.codomain_size != s_prime.output_cardinality())
    return false;
  std::set<IoPair> target;
  for (const auto& p : s_prime.io_pairs()) target.insert(p);
  std::set<IoPair> source;
  for (const auto& p : s.io_pairs()) source.insert(p);
  for (const auto& [x, y] : source) {
    const auto& xi = m.x_map.image[x];
    const auto& yi = m.y_map.image[y];
    if (xi && yi && !target.count({*xi, *yi})) return false;
  }
  if (reflect_membership) {
    for (std::size_t x = 0; x < m.x_map.domain_size(); ++x) {
      for (std::size_t y = 0; y < m.y_map.domain_size(); ++y) {
        const auto& xi = m.x_map.image[x];
        const auto& yi = m.y_map.image[y];
        if (xi && yi && !source.count({x, y}) && target.count({*xi, *yi})) return false;
      }
    }
  }
  return true;
}

namespace {

constexpr std::size_t kMaskBits = 63;

class MorphismSearch {
 public:
  MorphismSearch(const FiniteSystem& s, const FiniteSystem& sp, const MorphismRequirement& req,
                 const EnumerationOptions& opt, const std::function<bool(const Morphism&)>& visit)
      : req_(req), opt_(opt), visit_(visit) {
    nx_ = s.input_cardinality();
    ny_ = s.output_cardinality();
    nxp_ = sp.input_cardinality();
    nyp_ = sp.output_cardinality();
    const auto limit = std::min(opt.cap, kMaskBits);
    for (auto n : {nx_, ny_, nxp_, nyp_}) {
      if (n > limit)
        fail(ErrorCode::CapExceeded, "carrier of size " + std::to_string(n) + " exceeds enumeration cap " +
                                         std::to_string(limit));
    }
    req_x_ = normalize(req.x);
    req_y_ = normalize(req.y);
    rows_.assign(nx_, {});
    in_s_.assign(nx_ * ny_, false);
    for (const auto& [x, y] : s.io_pairs()) {
      rows_[x].push_back(y);
      in_s_[x * ny_ + y] = true;
    }
    sp_rows_.assign(nxp_, 0);
    for (const auto& [x, y] : sp.io_pairs()) sp_rows_[x] |= (std::uint64_t{1} << y);
    full_yp_ = nyp_ == 0 ? 0 : ((std::uint64_t{1} << nyp_) - 1);
    allowed_.assign(ny_, full_yp_);
    rho_.assign(nx_, std::nullopt);
    vartheta_.assign(ny_, std::nullopt);
  }

  std::size_t run() {
    assign_x(0, 0);
    return count_;
  }

 private:
  struct Req {
    bool injective, surjective, total;
  };

  Req normalize(const MapRequirement& r) const {
    return {r.injective || r.invertible, r.surjective || r.invertible, r.invertible || !opt_.allow_partial};
  }

  // Returns false when the visitor asked to stop.
  bool assign_x(std::size_t i, std::uint64_t used) {
    if (i == nx_) {
      if (req_x_.surjective && std::popcount(used) != static_cast<int>(nxp_)) return true;
      return assign_y(0, 0);
    }
    const auto remaining = nx_ - i - 1;
    for (std::size_t xp = 0; xp <= nxp_; ++xp) {
      const bool undefined = xp == nxp_;
      if (undefined && req_x_.total) break;
      std::uint64_t next_used = used;
      if (!undefined) {
        const auto bit = std::uint64_t{1} << xp;
        if (req_x_.injective && (used & bit)) continue;
        next_used |= bit;
      }
      if (req_x_.surjective && nxp_ - std::popcount(next_used) > remaining) continue;
      // narrow the admissible images of every y related to x_i
      std::vector<std::pair<std::size_t, std::uint64_t>> saved;
      bool dead = false;
      if (!undefined) {
        for (auto y : rows_[i]) {
          saved.emplace_back(y, allowed_[y]);
          allowed_[y] &= sp_rows_[xp];
          if (allowed_[y] == 0 && req_y_.total) dead = true;
        }
      }
      if (!dead) {
        rho_[i] = undefined ? std::nullopt : std::optional<std::size_t>(xp);
        if (!assign_x(i + 1, next_used)) return false;
      }
      for (const auto& [y, mask] : saved) allowed_[y] = mask;
    }
    rho_[i] = std::nullopt;
    return true;
  }

  bool assign_y(std::size_t j, std::uint64_t used) {
    if (j == ny_) {
      if (req_y_.surjective && std::popcount(used) != static_cast<int>(nyp_)) return true;
      return emit();
    }
    const auto remaining = ny_ - j - 1;
    for (std::size_t yp = 0; yp <= nyp_; ++yp) {
      const bool undefined = yp == nyp_;
      if (undefined && req_y_.total) break;
      std::uint64_t next_used = used;
      if (!undefined) {
        const auto bit = std::uint64_t{1} << yp;
        if (!(allowed_[j] & bit)) continue;
        if (req_y_.injective && (used & bit)) continue;
        next_used |= bit;
      }
      if (req_y_.surjective && nyp_ - std::popcount(next_used) > remaining) continue;
      vartheta_[j] = undefined ? std::nullopt : std::optional<std::size_t>(yp);
      if (!assign_y(j + 1, next_used)) return false;
    }
    vartheta_[j] = std::nullopt;
    return true;
  }

  bool emit() {
    if (opt_.reflect_membership) {
      for (std::size_t x = 0; x < nx_; ++x) {
        if (!rho_[x]) continue;
        for (std::size_t y = 0; y < ny_; ++y) {
          if (!vartheta_[y] || in_s_[x * ny_ + y]) continue;
          if (sp_rows_[*rho_[x]] & (std::uint64_t{1} << *vartheta_[y])) return true;
        }
      }
    }
    Morphism m{{nxp_, rho_}, {nyp_, vartheta_}};
    ++count_;
    return visit_(m);
  }

  MorphismRequirement req_;
  EnumerationOptions opt_;
  const std::function<bool(const Morphism&)>& visit_;
  Req req_x_{}, req_y_{};
  std::size_t nx_ = 0, ny_ = 0, nxp_ = 0, nyp_ = 0;
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<bool> in_s_;
  std::vector<std::uint64_t> sp_rows_;
  std::uint64_t full_yp_ = 0;
  std::vector<std::uint64_t> allowed_;
  std::vector<std::optional<std::size_t>> rho_, vartheta_;
  std::size_t count_ = 0;
};

}  // namespace

std::size_t for_each_morphism(const FiniteSystem& s, const FiniteSystem& s_prime, const MorphismRequirement& require,
                              const EnumerationOptions& options, const std::function<bool(const Morphism&)>& visit) {
  MorphismSearch search(s, s_prime, require, options, visit);
  return search.run();
}

std::vector<Morphism> enumerate_morphisms(const FiniteSystem& s, const FiniteSystem& s_prime,
                                          const MorphismRequirement& require, const EnumerationOptions& options) {
  std::vector<Morphism> out;
  for_each_morphism(s, s_prime, require, options, [&](const Morphism& m) {
    if (out.size() >= options.max_results)
      fail(ErrorCode::CapExceeded, "more than " + std::to_string(options.max_results) + " morphisms");
    out.push_back(m);
    return true;
  });
  return out;
}

std::optional<Morphism> find_morphism(const FiniteSystem& s, const FiniteSystem& s_prime,
                                      const MorphismRequirement& require, const EnumerationOptions& options) {
  std::optional<Morphism> found;
  for_each_morphism(s, s_prime, require, options, [&](const Morphism& m) {
    found = m;
    return false;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Quotient

namespace {

template <typename KeyOf>
Partition preimage_partition(std::size_t n, KeyOf key_of) {
  Partition p;
  p.w.resize(n);
  std::map<std::size_t, std::size_t> class_of_key;
  for (std::size_t e = 0; e < n; ++e) {
    const std::optional<std::size_t> key = key_of(e);
    if (!key) {
      p.w[e] = p.classes.size();
      p.classes.push_back({e});
      p.z.push_back(std::nullopt);
      continue;
    }
    auto [it, inserted] = class_of_key.emplace(*key, p.classes.size());
    if (inserted) {
      p.classes.push_back({});
      p.z.push_back(*key);
    }
    p.w[e] = it->second;
    p.classes[it->second].push_back(e);
  }
  return p;
}

}  // namespace

QuotientReport quotient(const FiniteSystem& s, const Morphism& m) {
  if (m.x_map.domain_size() != s.input_cardinality() || m.y_map.domain_size() != s.output_cardinality())
    fail(ErrorCode::IncompatibleMorphism, "morphism domain does not match the system's carriers");
  QuotientReport r;
  r.source_pairs = s.io_pairs();
  r.target_output_cardinality = m.y_map.codomain_size;
  r.inputs = preimage_partition(m.x_map.domain_size(), [&](std::size_t x) { return m.x_map.image[x]; });
  r.outputs = preimage_partition(m.y_map.domain_size(), [&](std::size_t y) { return m.y_map.image[y]; });
  const auto ny = m.y_map.codomain_size;
  r.tuples = preimage_partition(r.source_pairs.size(), [&](std::size_t k) -> std::optional<std::size_t> {
    const auto& xi = m.x_map.image[r.source_pairs[k].first];
    const auto& yi = m.y_map.image[r.source_pairs[k].second];
    if (!xi || !yi) return std::nullopt;
    return *xi * ny + *yi;
  });
  return r;
}

}  // namespace tlsys
