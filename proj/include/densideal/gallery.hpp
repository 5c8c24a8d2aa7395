#pragma once

#include <string>
#include <vector>

#include "densideal/index_map.hpp"
#include "densideal/measures.hpp"
#include "densideal/weights.hpp"

namespace densideal::gallery {

// B is the dominating set, C the dominated one: |C ∩ n| <= |B ∩ n|.
struct WitnessPair {
  OmegaSubset b;
  OmegaSubset c;
};

struct Example {
  MeasureSequence measures;
  WitnessPair witnesses;
};

// Uniform 1/k! on (2k!, 3k!]; B = ⋃(k!, 2k!], C = ⋃(2k!, 3k!].
Example eu_not_ii();
OmegaSubset factorial_band(unsigned long from, unsigned long to);  // ⋃_k (from·k!, to·k!]

// Branch of s in (0, 1): codes 2^k - 1 + floor(s 2^k) of its binary prefixes, k >= 1.
OmegaSubset branch(const Rational& s);
// Branches of (i+1)/(2i+3), i < count.
std::vector<OmegaSubset> almost_disjoint_family(std::size_t count);

struct DisjointnessCertificate {
  std::size_t left = 0;
  std::size_t right = 0;
  Integer common;  // |left ∩ right ∩ horizon|
  Integer last;    // largest common element, -1 when none
};
// Throws validation_error when two members share an element in [horizon/2, horizon).
std::vector<DisjointnessCertificate> certify_almost_disjoint(const std::vector<OmegaSubset>& family,
                                                             const Integer& horizon);

struct AntichainMember {
  OmegaSubset member;
  MeasureSequence measures;  // blocks indexed by the member only
  WitnessPair witnesses;     // C = ⋃ D_m for m in member \ {0}, B = the m! points before each n_m
};
// Uses the first `count` members; almost disjointness is checked up to 2^12.
std::vector<AntichainMember> antichain_eu_not_simple(const std::vector<OmegaSubset>& family, std::size_t count);

// One plateau weight f_L per member L.
std::vector<WeightFunction> antichain_eu_simple(const std::vector<OmegaSubset>& family,
                                                const weights::PlateauBase& base);
// Upper ends l·n_l of the first `count` plateaus of L (those whose base values exist).
std::vector<Integer> plateau_ends(const weights::PlateauBase& base, const OmegaSubset& indices, std::size_t count);

struct SingleWitness {
  MeasureSequence measures;
  OmegaSubset b;
};
// Bucketed blocks; B collects L^n_1..L^n_{k_n} of every block.
SingleWitness ii_not_aud();

// Heavy last halves; C = the heavy halves, B = the light halves before them.
Example aud_not_ii();

struct IsoPair {
  MeasureSequence first;   // mass on the first half of each block
  MeasureSequence second;  // mass on the last half
  IndexMap swap;           // reverses every block
  WitnessPair witnesses;   // C = last halves, B = first halves
};
IsoPair iso_pair();

struct PermExample {
  MeasureSequence measures;
  WitnessPair witnesses;
  std::size_t groups = 0;
  Integer horizon;  // end of the last materialised group; B and C are exact below it
};
// Triangular blocks; B = {min φ[D_n]}, C = ⋃_k φ[D_{l_k}] with b_{l_k} largest in group k.
// φ must permute [0, horizon); witnesses are materialised for the first `groups` groups.
PermExample perm_breaks_ii(const IndexMap& phi, std::size_t groups);

// Building blocks of the witnesses, addressable from their descriptors.
OmegaSubset bucket_union();                    // ⋃_n ⋃_{k <= k_n} L^n_k
OmegaSubset doubling_half(bool last);          // halves of [2^{n+1}-2, 2^{n+2}-2)
OmegaSubset factorial_half(bool last);         // halves of the blocks of size 2 n!
OmegaSubset antichain_support(const OmegaSubset& member);  // D_m, m in member \ {0}
OmegaSubset antichain_gap(const OmegaSubset& member);      // [n_m - m!, n_m), m in member \ {0}
Interval factorial_block(std::size_t n);       // [sum_{i<n} 2 i!, + 2 n!)
Interval triangular_block(std::size_t label);  // label >= 1
IndexMap reverse_factorial_blocks();
IndexMap reverse_triangular_blocks();

}  // namespace densideal::gallery
