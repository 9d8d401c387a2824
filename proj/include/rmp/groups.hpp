// Constructors for the step measures driving the experiments: an SL(2,Z)
// baseline, complex and quaternionic groups realified into real matrix
// groups, and the Lorentz-group exterior square used as a negative control.
// All shipped atoms are exact integer matrices of determinant +-1.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmp/linalg.hpp"
#include "rmp/prng.hpp"

namespace rmp::groups {

using linalg::IMat;
using linalg::Mat;

// Finitely supported step law on invertible matrices.
class GroupMeasure {
 public:
  // Real-valued atoms; integer structure detected and verified when present.
  GroupMeasure(int dim, std::vector<Mat> atoms, std::vector<double> weights,
               std::string label);

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  bool integer_flag() const { return integer_flag_; }
  std::size_t atom_count() const { return atoms_.size(); }
  const Mat& atom(std::size_t i) const { return atoms_[i]; }
  const IMat& atom_int(std::size_t i) const { return atoms_int_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  // log(sigma_1/sigma_d) of an atom; used to budget product re-factorization.
  double atom_log_kappa(std::size_t i) const { return atom_log_kappa_[i]; }

  // Exact integer matrices commuting with every atom (complex / quaternionic
  // structure operators); empty for plain real measures.
  const std::vector<IMat>& structures() const { return structures_; }
  void set_structures(std::vector<IMat> s) { structures_ = std::move(s); }

  std::size_t sample_index(Rng& rng) const;

 private:
  int dim_;
  std::string label_;
  bool integer_flag_ = false;
  std::vector<Mat> atoms_;
  std::vector<IMat> atoms_int_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<double> atom_log_kappa_;
  std::vector<IMat> structures_;
};

// Entrywise-complex integer matrix (Gaussian integers).
struct ComplexIntMatrix {
  IMat re;
  IMat im;
};

// Entrywise-quaternion integer matrix over the Lipschitz order Z<1,i,j,k>.
struct QuatIntMatrix {
  IMat a, b, c, d;  // coefficients of 1, i, j, k
};

// I + q E_{ij}, i != j.
QuatIntMatrix quaternion_transvection(int m, int i, int j, std::int64_t qa, std::int64_t qb,
                                      std::int64_t qc, std::int64_t qd);

// 2x2-block realification (a+bi acts as [[a,-b],[b,a]]); requires each atom
// to have Gaussian-integer determinant exactly 1.
GroupMeasure realify_complex(const std::vector<ComplexIntMatrix>& atoms,
                             const std::vector<double>& weights, std::string label = "complex");

// 4x4-block realification of left quaternion multiplication on basis
// (1,i,j,k); each atom must realify to determinant exactly 1 (equivalently,
// reduced norm 1).  Atoms failing the check are rejected as unsupported.
GroupMeasure realify_quaternion(const std::vector<QuatIntMatrix>& atoms,
                                const std::vector<double>& weights,
                                std::string label = "quaternion");

// Exterior-square action of integer Lorentz-form-preserving generators;
// every generator must satisfy g^T J g = J exactly for J = diag(1,-1,...,-1).
GroupMeasure so1d_exterior_square(const std::vector<IMat>& generators,
                                  const std::vector<double>& weights,
                                  std::string label = "so1d-ext2");

// Uniform measure on {[[1,2],[0,1]], [[1,0],[2,1]]} and their inverses.
GroupMeasure baseline_proximal_sl2z();

// Block-diagonal right-multiplication structure operators.
IMat complex_structure(int half_dim);                    // realification of i*I
IMat quaternion_structure(int m, char unit);             // right mult by 'i','j','k'

// Named presets: "sl2z", "slc2-in-sl4", "slh2-in-sl8", "so1-7-ext2".
GroupMeasure preset(const std::string& name);
std::vector<std::string> preset_names();

// The measure of transpose-inverses (exact for integer atoms).
GroupMeasure transpose_inverse_measure(const GroupMeasure& mu);

// Exact integer determinant (fraction-free elimination over big integers).
// Returned as a decimal string to keep big integers out of the interface.
std::string integer_determinant(const IMat& m);

}  // namespace rmp::groups
