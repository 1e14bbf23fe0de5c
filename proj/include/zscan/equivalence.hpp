#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zscan/model.hpp"

namespace zscan {

// Multiset of the characteristics of all points, sorted ascending. This is a
// relabeling invariant but not a complete one.
using WeakNumericalType = std::vector<CharTriple>;

WeakNumericalType weak_numerical_type(const Arrangement& a);

std::string to_string(const WeakNumericalType& t);

// sigma[i-1] is the new label of line i; must be a permutation of 1..n.
using Permutation = std::vector<LineId>;

// Applies the relabeling and renormalizes. Throws NotAPermutation.
Arrangement relabel(const Arrangement& a, const Permutation& sigma);

// Canonical key: "n=<n>:" followed by the lexicographically smallest
// serialization over all n! line relabelings. Each point serializes as
// "(on_conic,tangent-or-0,[lines])"; records are sorted and concatenated.
// Two arrangements are equivalent exactly when their keys are equal.
using CanonicalKey = std::string;

CanonicalKey canonical_key(const Arrangement& a);

// The key is a faithful serialization; this parses it back into the
// canonical representative of its class. Throws on malformed input.
Arrangement arrangement_from_key(const CanonicalKey& key);

struct EquivalenceWitness {
  Permutation sigma;                  // line relabeling a -> b
  std::vector<PointIndex> point_map;  // a's point i corresponds to b's point_map[i]
};

// Searches for a line relabeling carrying a onto b, pruned by matching line
// profiles. Deliberately does not consult canonical keys so the two can be
// tested against each other.
std::optional<EquivalenceWitness> are_equivalent(const Arrangement& a,
                                                 const Arrangement& b);

}  // namespace zscan
