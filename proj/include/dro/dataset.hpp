#ifndef DRO_DATASET_HPP
#define DRO_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace dro {

/// Binary classification dataset.  Features are stored dense; labels are
/// strictly {-1, +1} ({0, 1} sources are remapped at ingestion).
struct Dataset {
  Eigen::MatrixXd features;  // N x feature_dim
  Eigen::VectorXd labels;    // entries in {-1, +1}
  std::string name;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index feature_dim() const { return features.cols(); }

  /// Observation z_i = [x_i; y_i].
  Eigen::VectorXd observation(Eigen::Index i) const;
};

struct SplitSpec {
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Sparse LIBSVM text format: "label idx:val idx:val ...", 1-based strictly
/// increasing indices.  Absent indices are zero.
Dataset parse_libsvm(std::istream& in, const std::string& name = "");
Dataset load_libsvm_file(const std::string& path);
void write_libsvm(const Dataset& data, std::ostream& out);

/// Seeded uniform shuffle (mt19937_64, Fisher-Yates with modulo reduction;
/// the exact bitstream is part of the contract), first floor(f*N) rows to
/// train.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

/// Randomly drops rows with the given label until its proportion is reduced
/// by reduction_factor; weights implicitly reset to uniform over survivors.
Dataset unbalance(const Dataset& data, double minority_label,
                  double reduction_factor, std::uint64_t seed);

/// Probability that a random positive outscores a random negative, ties
/// counted one half.
double roc_auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

namespace detail {

/// Deterministic cross-platform shuffle: Fisher-Yates with draws reduced by
/// modulo from the raw mt19937_64 stream.
void seeded_shuffle(std::vector<Eigen::Index>& idx, std::uint64_t seed);

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

}  // namespace detail

}  // namespace dro

#endif  // DRO_DATASET_HPP
