#pragma once

#include <string>
#include <vector>

#include "s2g/sample_batch.hpp"
#include "s2g/sampler.hpp"
#include "s2g/trainer.hpp"

namespace s2g::csv {

/// Shortest round-trip decimal form ("%.17g" trimmed), locale independent.
std::string format_double(double v);

/// Header `x,label` (1-D) or `x,y,label`.
std::string samples_to_csv(const SampleBatch& batch);
/// Throws ParseError naming the 1-based line.
SampleBatch samples_from_csv(const std::string& text, const std::string& source = "<string>");

/// Header `chain,t,x[,y]`; rows for each chain run t = T .. 0.
std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories, int T);
std::vector<Trajectory> trajectories_from_csv(const std::string& text,
                                              const std::string& source = "<string>");

/// Header `step,loss`.
std::string loss_to_csv(const std::vector<LossPoint>& curve);

/// Generic table: header row then one row per entry, values via format_double.
std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Splits a file into rows of cells. Quotes are not supported; blank lines
/// are skipped. The first row is the header.
std::vector<std::vector<std::string>> parse_rows(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace s2g::csv
