#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace saomre {

/// Directed binary network on n actors. Row = sender, column = receiver; the
/// diagonal is always zero.
class Network {
 public:
  Network() = default;
  explicit Network(std::size_t n_actors);

  /// Builds from a dense 0/1 matrix. Throws ValidationError on non-square or
  /// non-binary input; nonzero diagonal entries are dropped and counted in
  /// `*dropped_self_ties` when given.
  static Network from_matrix(const std::vector<std::vector<int>>& rows,
                             std::size_t* dropped_self_ties = nullptr);

  std::size_t size() const { return n_; }
  bool tie(std::size_t i, std::size_t j) const { return ties_[i * n_ + j] != 0; }

  void set_tie(std::size_t i, std::size_t j, bool value);
  void toggle(std::size_t i, std::size_t j);

  int out_degree(std::size_t i) const;
  int in_degree(std::size_t j) const;
  int tie_count() const;

  friend bool operator==(const Network& a, const Network& b) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> ties_;
};

/// Number of ordered pairs whose tie value differs.
int hamming_distance(const Network& a, const Network& b);

/// Element of the adjacency set of a focal actor: flip one outgoing tie or do nothing.
struct Candidate {
  std::optional<std::size_t> target;

  static Candidate toggle(std::size_t j) { return Candidate{j}; }
  static Candidate no_change() { return Candidate{std::nullopt}; }
  bool is_toggle() const { return target.has_value(); }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Toggles for every j != i in increasing order, then the no-change candidate.
std::vector<Candidate> adjacency_candidates(const Network& x, std::size_t i);

Network apply_candidate(const Network& x, std::size_t i, const Candidate& c);

/// Sum of squared deviations of the out-degrees from their mean.
double out_degree_dispersion(const Network& x);

/// Actor-level covariate with the constants derived from it at load time.
struct Covariate {
  std::vector<double> values;
  double range = 1.0;       // max - min, 1 for a constant covariate
  double sim_mean = 0.0;    // mean similarity over ordered pairs i != j

  double similarity(std::size_t i, std::size_t j) const;
};

Covariate make_covariate(std::vector<double> values);

using CovariateSet = std::map<std::string, Covariate>;

struct PanelData {
  Network wave1;
  Network wave2;
  CovariateSet covariates;
  std::vector<std::string> warnings;

  std::size_t n_actors() const { return wave1.size(); }
};

/// Validates dimensions across waves and covariates.
PanelData make_panel(Network wave1, Network wave2, CovariateSet covariates);

/// Reads whitespace-separated matrix files and one-value-per-line covariate files.
PanelData load_panel(const std::filesystem::path& wave1_path,
                     const std::filesystem::path& wave2_path,
                     const std::map<std::string, std::filesystem::path>& covariate_paths);

Network read_network(const std::filesystem::path& path, std::size_t* dropped_self_ties = nullptr);
std::vector<double> read_covariate(const std::filesystem::path& path);

void write_network(const Network& x, std::ostream& out);
void write_network(const Network& x, const std::filesystem::path& path);

}  // namespace saomre
