#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "siren/diagnostics.hpp"
#include "siren/experiments.hpp"

namespace siren {

/// Tidy table: one header row, values stored as text.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

/// Shortest text that parses back to the same double ("inf", "nan" for specials).
std::string format_double(double v);

Table to_table(const VarianceProfile& profile);
Table to_table(const GradientDepthScan& scan);
Table to_table(const NtkTraceScan& scan);
Table to_table(const SpectrumReport& spectrum);
/// Long format: eigen_index, frequency, power.
Table to_table(const OverlapMap& overlap);
/// Long format: depth, rank, singular_value.
Table to_table(const SingularSpectrumScan& scan);
/// Columns task, scheme, L, N, seed, train_mse, test_mse, psnr, snr, epochs,
/// lr, omega0, wall_s (plus n_train, n_test, cutoff_energy_fraction).
Table to_table(const std::vector<ExperimentReport>& reports);
/// Long format: scheme, L, N, seed, epoch, loss.
Table loss_curves(const std::vector<ExperimentReport>& reports);

nlohmann::json to_json(const InitScheme& scheme);
nlohmann::json to_json(const NetworkDims& dims);
nlohmann::json to_json(const VarianceProfile& profile);
nlohmann::json to_json(const GradientDepthScan& scan);
nlohmann::json to_json(const NtkTraceScan& scan);
nlohmann::json to_json(const SpectrumReport& spectrum);
nlohmann::json to_json(const OverlapMap& overlap);
nlohmann::json to_json(const SingularSpectrumScan& scan);
nlohmann::json to_json(const ExperimentReport& report);

}  // namespace siren
