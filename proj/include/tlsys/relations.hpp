#pragma once

// Finite abstract systems: relations on explicitly enumerated sets, their
// input-output view, cascade connection, goal-seeking checks, morphism
// enumeration and quotients.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tlsys/error.hpp"

namespace tlsys {

/// An element of a finite set: an integer or a symbol.
class Atom {
 public:
  Atom(std::int64_t value) : value_(value) {}
  Atom(int value) : value_(static_cast<std::int64_t>(value)) {}
  Atom(std::string symbol) : value_(std::move(symbol)) {}
  Atom(const char* symbol) : value_(std::string(symbol)) {}

  bool is_integer() const noexcept { return std::holds_alternative<std::int64_t>(value_); }
  std::int64_t as_integer() const;
  const std::string& as_symbol() const;
  std::string to_string() const;

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;

 private:
  std::variant<std::int64_t, std::string> value_;
};

/// Named, non-empty, duplicate-free list of atoms. Declaration order is the
/// canonical order used everywhere.
class FiniteSet {
 public:
  FiniteSet(std::string name, std::vector<Atom> elements);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const Atom& operator[](std::size_t i) const { return elements_.at(i); }
  const std::vector<Atom>& elements() const noexcept { return elements_; }

  std::optional<std::size_t> find(const Atom& a) const;
  /// Throws UnknownElement.
  std::size_t index_of(const Atom& a) const;

  /// Same elements in the same order (names ignored).
  bool same_elements(const FiniteSet& other) const { return elements_ == other.elements_; }
  /// Same elements regardless of order.
  bool same_element_set(const FiniteSet& other) const;

 private:
  std::string name_;
  std::vector<Atom> elements_;
  std::map<Atom, std::size_t> index_;
};

/// {0, 1, ..., n-1} as integer atoms.
FiniteSet integer_range(std::string name, std::size_t n);

/// Element indices, one per component.
using Tuple = std::vector<std::size_t>;
using AtomTuple = std::vector<Atom>;

struct IoPartition {
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
};

/// (input index, output index) over the flattened input and output objects.
using IoPair = std::pair<std::size_t, std::size_t>;

class FiniteSystem {
 public:
  /// Tuples are element indices. Throws EmptyComponent, ArityMismatch,
  /// UnknownElement (index out of range) or NotAPartition.
  FiniteSystem(std::vector<FiniteSet> components, std::set<Tuple> tuples,
               std::optional<IoPartition> io = std::nullopt);

  const std::vector<FiniteSet>& components() const noexcept { return components_; }
  const FiniteSet& component(std::size_t i) const { return components_.at(i); }
  std::size_t arity() const noexcept { return components_.size(); }
  const std::set<Tuple>& tuples() const noexcept { return tuples_; }
  std::size_t size() const noexcept { return tuples_.size(); }
  bool contains(const Tuple& t) const { return tuples_.count(t) > 0; }

  bool has_io() const noexcept { return io_.has_value(); }
  /// Throws NoPartition.
  const IoPartition& io() const;

  // Input-output view. The input object X is the product of the input
  // components in partition order, flattened in mixed radix with the first
  // component most significant; likewise for Y.
  std::size_t input_cardinality() const;
  std::size_t output_cardinality() const;
  std::size_t input_index(const Tuple& t) const;
  std::size_t output_index(const Tuple& t) const;
  std::vector<std::size_t> decode_input(std::size_t x) const;
  std::vector<std::size_t> decode_output(std::size_t y) const;
  std::string input_label(std::size_t x) const;
  std::string output_label(std::size_t y) const;
  /// Distinct (x, y) pairs in canonical order.
  std::vector<IoPair> io_pairs() const;

  AtomTuple atoms_of(const Tuple& t) const;

 private:
  std::size_t flatten(const Tuple& t, const std::vector<std::size_t>& idx) const;
  std::vector<std::size_t> unflatten(std::size_t v, const std::vector<std::size_t>& idx) const;
  std::string label(std::size_t v, const std::vector<std::size_t>& idx) const;

  std::vector<FiniteSet> components_;
  std::set<Tuple> tuples_;
  std::optional<IoPartition> io_;
};

/// Validated system from atom tuples; duplicates collapse.
FiniteSystem make_system(std::vector<FiniteSet> components, const std::vector<AtomTuple>& tuples);

/// Input indices become I_x, the complement I_y. Throws NotAPartition.
FiniteSystem as_input_output(const FiniteSystem& s, const std::vector<std::size_t>& input_indices);

/// True iff no input value relates to two different output values.
bool is_function_type(const FiniteSystem& s);

/// Component indices of the coupling object Z in the output of the first
/// system and in the input of the second, matched position by position.
struct Coupling {
  std::vector<std::size_t> first_outputs;
  std::vector<std::size_t> second_inputs;
};

/// S3 ⊂ (X1 × X2) × (Y1 × Y2) where X2, Y1 exclude the coupling components:
/// ((x1,x2),(y1,y2)) ∈ S3 iff some z has (x1,(y1,z)) ∈ S1 and ((x2,z),y2) ∈ S2.
/// Component order of the result: inputs of s1, non-coupling inputs of s2,
/// non-coupling outputs of s1, outputs of s2. Throws CouplingMismatch.
FiniteSystem cascade(const FiniteSystem& s1, const FiniteSystem& s2, const Coupling& coupling);

// ---------------------------------------------------------------------------
// Goal-seeking

enum class GoalSeekingForm {
  /// sf [Θ,X,Y], sg [X,Y,Θ], goal [Θ,X,Y,V], seek [X,Y,V,Θ], s [X,Y]
  input_output,
  /// sf = H [Θ,X,Y], sg = A [D,Θ], goal [D,Θ,V], seek [V,D,Θ], s [D,X,Y]
  learning,
};

struct GoalSeekingSpec {
  GoalSeekingForm form;
  FiniteSystem goal;
  FiniteSystem seek;
  FiniteSet value_set;
};

struct Violation {
  std::string check;
  AtomTuple witness;
  std::string detail;
};

struct GoalSeekingReport {
  std::vector<Violation> violations;
  bool pass() const noexcept { return violations.empty(); }
};

/// Lists every situation violating goal totality, the seeking biconditional
/// or (when `s` is given) the functional biconditional. Throws
/// IncompatibleCarriers when component sets disagree with the layout.
GoalSeekingReport check_goal_seeking(const FiniteSystem& sf, const FiniteSystem& sg, const GoalSeekingSpec& gs,
                                     const FiniteSystem* s = nullptr);

// ---------------------------------------------------------------------------
// Morphisms

/// A possibly partial map between two index ranges.
struct MapTable {
  std::size_t codomain_size = 0;
  std::vector<std::optional<std::size_t>> image;

  std::size_t domain_size() const noexcept { return image.size(); }
  bool total() const;
  bool injective() const;
  bool surjective() const;
  bool invertible() const { return total() && injective() && surjective(); }
  /// Identity on the index level; domain and codomain sizes must agree.
  bool identity() const;

  static MapTable total_map(std::vector<std::size_t> values, std::size_t codomain_size);
  static MapTable identity_map(std::size_t n);
};

struct MapProperties {
  bool total = false;
  bool partial = false;
  bool injective = false;
  bool surjective = false;
  bool invertible = false;

  bool operator==(const MapProperties&) const = default;
};

MapProperties properties_of(const MapTable& m);

struct MorphismProperties {
  MapProperties x;
  MapProperties y;
  /// Conjunction of both maps' flags.
  MapProperties joint;
};

/// Pair of maps (ϱ, ϑ) on the flattened input and output objects.
struct Morphism {
  MapTable x_map;
  MapTable y_map;

  MorphismProperties properties() const;
  bool operator==(const Morphism& o) const { return x_map.image == o.x_map.image && y_map.image == o.y_map.image; }
};

struct MapRequirement {
  bool injective = false;
  bool surjective = false;
  bool invertible = false;
};

struct MorphismRequirement {
  MapRequirement x;
  MapRequirement y;

  /// Both maps surjective (homomorphism onto).
  static MorphismRequirement onto() { return {{false, true, false}, {false, true, false}}; }
  static MorphismRequirement iso() { return {{true, true, true}, {true, true, true}}; }
};

struct EnumerationOptions {
  /// Maximum carrier size of X, Y, X', Y'.
  std::size_t cap = 8;
  /// Also require (x,y) ∉ S ⇒ image ∉ S'.
  bool reflect_membership = false;
  /// Allow elements to stay unmapped (partial morphisms).
  bool allow_partial = false;
  /// enumerate_morphisms refuses (CapExceeded) to build larger result lists.
  std::size_t max_results = 1'000'000;
};

/// Checks (ϱ(x), ϑ(y)) ∈ S' for every (x,y) ∈ S with both images defined.
bool is_relation_preserving(const FiniteSystem& s, const FiniteSystem& s_prime, const Morphism& m,
                            bool reflect_membership = false);

/// Visits every morphism in canonical order (lexicographic over ϱ then ϑ).
/// The visitor returns false to stop. Returns the number visited.
std::size_t for_each_morphism(const FiniteSystem& s, const FiniteSystem& s_prime, const MorphismRequirement& require,
                              const EnumerationOptions& options,
                              const std::function<bool(const Morphism&)>& visit);

std::vector<Morphism> enumerate_morphisms(const FiniteSystem& s, const FiniteSystem& s_prime,
                                          const MorphismRequirement& require = {},
                                          const EnumerationOptions& options = {});

/// First morphism in canonical order, if any.
std::optional<Morphism> find_morphism(const FiniteSystem& s, const FiniteSystem& s_prime,
                                      const MorphismRequirement& require = {}, const EnumerationOptions& options = {});

// ---------------------------------------------------------------------------
// Quotients

struct Partition {
  std::vector<std::vector<std::size_t>> classes;
  /// Element -> class index.
  std::vector<std::size_t> w;
  /// Class -> target element; empty for singleton classes of unmapped elements.
  std::vector<std::optional<std::size_t>> z;

  std::size_t carrier_size() const noexcept { return w.size(); }
  std::size_t class_count() const noexcept { return classes.size(); }
};

/// Preimage partitions of S (its io pairs), X and Y under a morphism. The
/// tuple partition's targets are flattened X'×Y' indices x'·|Y'| + y'.
struct QuotientReport {
  std::vector<IoPair> source_pairs;
  Partition tuples;
  Partition inputs;
  Partition outputs;
  std::size_t target_output_cardinality = 0;

  std::size_t system_size() const noexcept { return tuples.carrier_size(); }
  std::size_t system_classes() const noexcept { return tuples.class_count(); }
  std::size_t input_size() const noexcept { return inputs.carrier_size(); }
  std::size_t input_classes() const noexcept { return inputs.class_count(); }
  std::size_t output_size() const noexcept { return outputs.carrier_size(); }
  std::size_t output_classes() const noexcept { return outputs.class_count(); }
};

/// Throws IncompatibleMorphism when the maps' domains do not match s.
QuotientReport quotient(const FiniteSystem& s, const Morphism& m);

}  // namespace tlsys
