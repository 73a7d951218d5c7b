#pragma once

#include <string>
#include <vector>

#include "motdual/discretize.hpp"
#include "motdual/marginals.hpp"
#include "motdual/mot.hpp"

namespace motdual {

// All readers throw IoError naming the file when it cannot be opened and
// DomainError/ConfigError (with file and line) for malformed content.

// Header `t,value` (one path) or `path,t,value` (several, grouped by id).
std::vector<SampledPath> read_paths_csv(const std::string& file);
void write_paths_csv(const std::string& file, const std::vector<SampledPath>& paths);

// One block per path: header `N,T,initial`, its values, then `jump_time,sign`
// and one row per jump.
std::vector<GridPath> read_grid_paths_csv(const std::string& file);
void write_grid_paths_csv(const std::string& file, const std::vector<GridPath>& paths);

// Header `x,weight` (atomic) or `x,density` (piecewise-linear density).
Marginal read_marginal_csv(const std::string& file);

struct StoredMeasure {
  TreeConfig tree;
  TreeMeasure measure;
};

// {"tree": {N, m, J, B, T}, "masses": [[node, mass], ...]} with zero masses omitted.
void write_measure_json(const std::string& file, const PathTree& tree, const TreeMeasure& q);
StoredMeasure read_measure_json(const std::string& file);

struct StoredCertificate {
  TreeConfig tree;
  DualCertificate certificate;
};

// {"kind": "tree-hedge", "tree": {...}, "h": [[level, value], ...], "cash",
//  "lambda", "gamma": [[node, branch, position], ...]}
void write_certificate_json(const std::string& file, const PathTree& tree,
                            const DualCertificate& certificate);
StoredCertificate read_certificate_json(const std::string& file);

std::string read_text_file(const std::string& file);
void write_text_file(const std::string& file, const std::string& text);

}  // namespace motdual
