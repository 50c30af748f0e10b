#include "saomre/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "saomre/error.hpp"

namespace saomre {

Network::Network(std::size_t n_actors) : n_(n_actors), ties_(n_actors * n_actors, 0) {}

Network Network::from_matrix(const std::vector<std::vector<int>>& rows,
                             std::size_t* dropped_self_ties) {
  const std::size_t n = rows.size();
  if (n == 0) throw ValidationError("network matrix is empty");
  Network x(n);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ValidationError("network matrix is not square: row " + std::to_string(i + 1) +
                            " has " + std::to_string(rows[i].size()) + " entries, expected " +
                            std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const int v = rows[i][j];
      if (v != 0 && v != 1) {
        throw ValidationError("non-binary entry " + std::to_string(v) + " at (" +
                              std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
      }
      if (i == j) {
        dropped += static_cast<std::size_t>(v);
        continue;
      }
      x.ties_[i * n + j] = static_cast<std::uint8_t>(v);
    }
  }
  if (dropped_self_ties) *dropped_self_ties = dropped;
  return x;
}

void Network::set_tie(std::size_t i, std::size_t j, bool value) {
  if (i == j) throw ValidationError("self-ties are not allowed");
  ties_[i * n_ + j] = value ? 1 : 0;
}

void Network::toggle(std::size_t i, std::size_t j) {
  if (i == j) throw ValidationError("self-ties are not allowed");
  ties_[i * n_ + j] ^= 1;
}

int Network::out_degree(std::size_t i) const {
  return std::accumulate(ties_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                         ties_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_), 0);
}

int Network::in_degree(std::size_t j) const {
  int d = 0;
  for (std::size_t i = 0; i < n_; ++i) d += ties_[i * n_ + j];
  return d;
}

int Network::tie_count() const { return std::accumulate(ties_.begin(), ties_.end(), 0); }

int hamming_distance(const Network& a, const Network& b) {
  if (a.size() != b.size()) throw ValidationError("networks differ in size");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) d += a.tie(i, j) != b.tie(i, j);
  return d;
}

std::vector<Candidate> adjacency_candidates(const Network& x, std::size_t i) {
  if (i >= x.size()) {
    throw ValidationError("actor index " + std::to_string(i) + " out of range for " +
                          std::to_string(x.size()) + " actors");
  }
  std::vector<Candidate> out;
  out.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j != i) out.push_back(Candidate::toggle(j));
  out.push_back(Candidate::no_change());
  return out;
}

Network apply_candidate(const Network& x, std::size_t i, const Candidate& c) {
  Network y = x;
  if (c.is_toggle()) y.toggle(i, *c.target);
  return y;
}

double out_degree_dispersion(const Network& x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = x.out_degree(i);
  const double mean = std::accumulate(deg.begin(), deg.end(), 0.0) / static_cast<double>(n);
  double w = 0.0;
  for (double d : deg) w += (d - mean) * (d - mean);
  return w;
}

double Covariate::similarity(std::size_t i, std::size_t j) const {
  return 1.0 - std::abs(values[i] - values[j]) / range;
}

Covariate make_covariate(std::vector<double> values) {
  Covariate c;
  c.values = std::move(values);
  const std::size_t n = c.values.size();
  if (n == 0) return c;
  const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
  c.range = (*hi - *lo) > 0.0 ? (*hi - *lo) : 1.0;
  if (n > 1) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) sum += c.similarity(i, j);
    c.sim_mean = sum / static_cast<double>(n * (n - 1));
  }
  return c;
}

PanelData make_panel(Network wave1, Network wave2, CovariateSet covariates) {
  if (wave1.size() != wave2.size()) {
    throw ValidationError("dimension mismatch: wave 1 has " + std::to_string(wave1.size()) +
                          " actors, wave 2 has " + std::to_string(wave2.size()));
  }
  for (const auto& [name, cov] : covariates) {
    if (cov.values.size() != wave1.size()) {
      throw ValidationError("dimension mismatch: covariate '" + name + "' has " +
                            std::to_string(cov.values.size()) + " values for " +
                            std::to_string(wave1.size()) + " actors");
    }
  }
  PanelData panel;
  panel.wave1 = std::move(wave1);
  panel.wave2 = std::move(wave2);
  panel.covariates = std::move(covariates);
  return panel;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read file '" + path.string() + "'");
  return in;
}

}  // namespace

Network read_network(const std::filesystem::path& path, std::size_t* dropped_self_ties) {
  auto in = open_or_throw(path);
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<int> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw ValidationError("non-binary entry '" + tok + "' in '" + path.string() + "'");
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  try {
    return Network::from_matrix(rows, dropped_self_ties);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<double> read_covariate(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<double> values;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw ValidationError("non-numeric covariate value '" + tok + "' in '" + path.string() + "'");
    values.push_back(v);
  }
  return values;
}

PanelData load_panel(const std::filesystem::path& wave1_path,
                     const std::filesystem::path& wave2_path,
                     const std::map<std::string, std::filesystem::path>& covariate_paths) {
  std::size_t dropped1 = 0, dropped2 = 0;
  Network w1 = read_network(wave1_path, &dropped1);
  Network w2 = read_network(wave2_path, &dropped2);
  CovariateSet covs;
  for (const auto& [name, path] : covariate_paths) covs[name] = make_covariate(read_covariate(path));
  PanelData panel = make_panel(std::move(w1), std::move(w2), std::move(covs));
  for (auto [dropped, path] : {std::pair{dropped1, wave1_path}, std::pair{dropped2, wave2_path}}) {
    if (dropped > 0) {
      panel.warnings.push_back(std::to_string(dropped) + " nonzero diagonal entries in '" +
                               path.string() + "' set to 0");
      std::cerr << "warning: " << panel.warnings.back() << "\n";
    }
  }
  return panel;
}

void write_network(const Network& x, std::ostream& out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) out << ' ';
      out << (x.tie(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

void write_network(const Network& x, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  write_network(x, out);
}

}  // namespace saomre
