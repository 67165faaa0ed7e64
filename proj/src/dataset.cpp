#include "dro/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dro {

Eigen::VectorXd Dataset::observation(Eigen::Index i) const {
  Eigen::VectorXd z(feature_dim() + 1);
  z.head(feature_dim()) = features.row(i).transpose();
  z[feature_dim()] = labels[i];
  return z;
}

Dataset parse_libsvm(std::istream& in, const std::string& name) {
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> labels;
  int max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments and trailing CR
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;

    std::istringstream ls(line);
    double label;
    if (!(ls >> label))
      throw ParseError("line " + std::to_string(lineno) + ": bad label");

    std::vector<std::pair<int, double>> row;
    std::string tok;
    int prev_index = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) +
                         ": expected idx:val, got '" + tok + "'");
      int idx;
      double val;
      try {
        std::size_t used;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        std::string vs = tok.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": non-numeric token '" + tok + "'");
      }
      if (idx <= prev_index)
        throw ParseError("line " + std::to_string(lineno) +
                         ": indices must be 1-based strictly increasing");
      prev_index = idx;
      max_index = std::max(max_index, idx);
      row.emplace_back(idx, val);
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  if (rows.empty()) throw ParseError("empty dataset");

  Dataset data;
  data.name = name;
  data.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                        max_index);
  data.labels.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [idx, val] : rows[i])
      data.features(static_cast<Eigen::Index>(i), idx - 1) = val;
    double y = labels[i];
    if (y == 0.0) y = -1.0;  // {0,1} labels remapped to {-1,+1}
    if (y != -1.0 && y != 1.0)
      throw ParseError("label must be in {0,1} or {-1,+1}, got " +
                       std::to_string(labels[i]));
    data.labels[static_cast<Eigen::Index>(i)] = y;
  }
  return data;
}

Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  auto slash = path.find_last_of('/');
  return parse_libsvm(in, slash == std::string::npos ? path
                                                     : path.substr(slash + 1));
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    for (Eigen::Index j = 0; j < data.feature_dim(); ++j) {
      double v = data.features(i, j);
      if (v != 0.0) {
        std::ostringstream vs;
        vs.precision(17);
        vs << v;
        out << ' ' << (j + 1) << ':' << vs.str();
      }
    }
    out << '\n';
  }
}

namespace detail {

void seeded_shuffle(std::vector<Eigen::Index>& idx, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.name = data.name;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      data.feature_dim());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.labels[static_cast<Eigen::Index>(i)] = data.labels[rows[i]];
  }
  return out;
}

}  // namespace detail

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  detail::seeded_shuffle(idx, spec.seed);
  auto n_train = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == idx.size())
    throw std::invalid_argument("split: one side would be empty");
  std::vector<Eigen::Index> train_rows(idx.begin(),
                                       idx.begin() + static_cast<long>(n_train));
  std::vector<Eigen::Index> test_rows(idx.begin() + static_cast<long>(n_train),
                                      idx.end());
  return {detail::take_rows(data, train_rows),
          detail::take_rows(data, test_rows)};
}

Dataset unbalance(const Dataset& data, double minority_label,
                  double reduction_factor, std::uint64_t seed) {
  if (!(reduction_factor > 1.0))
    throw std::invalid_argument("unbalance: reduction_factor must be > 1");
  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> minority, majority;
  for (Eigen::Index i = 0; i < n; ++i)
    (data.labels[i] == minority_label ? minority : majority).push_back(i);
  if (minority.empty() || majority.empty())
    throw std::invalid_argument("unbalance: both labels must be present");

  // Keep n_keep minority rows so that the new proportion equals the original
  // one divided by reduction_factor:  n_keep / (n_keep + M) = prop / factor.
  double prop = static_cast<double>(minority.size()) / static_cast<double>(n);
  double target = prop / reduction_factor;
  double m = static_cast<double>(majority.size());
  auto n_keep = static_cast<std::size_t>(
      std::llround(target * m / (1.0 - target)));
  n_keep = std::min(n_keep, minority.size());

  std::vector<Eigen::Index> shuffled = minority;
  detail::seeded_shuffle(shuffled, seed);
  shuffled.resize(n_keep);

  std::vector<Eigen::Index> keep = majority;
  keep.insert(keep.end(), shuffled.begin(), shuffled.end());
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) throw std::invalid_argument("unbalance: empty result");
  return detail::take_rows(data, keep);
}

double roc_auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("roc_auc: size mismatch");
  const Eigen::Index n = scores.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[a] < scores[b];
  });

  // Rank-sum with midranks for ties: AUC = (R+ - n+(n+ + 1)/2) / (n+ n-).
  double rank_sum_pos = 0.0;
  double n_pos = 0.0, n_neg = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0) {
        rank_sum_pos += midrank;
        n_pos += 1.0;
      } else {
        n_neg += 1.0;
      }
    }
    i = j;
  }
  if (n_pos == 0.0 || n_neg == 0.0)
    throw std::invalid_argument("roc_auc: both classes must be present");
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace dro
