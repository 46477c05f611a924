#pragma once

// Deterministic file formats and small runtime utilities: operator CSV
// dump/load, numeric tables, content hashing, and the thread pool used
// for grid fan-out.
//
// All numeric CSV output uses 17 significant digits so values round-trip
// through text exactly; repeated runs produce byte-identical files at any
// parallelism degree.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "toricsim/ops.hpp"

namespace toricsim {

std::string format_g17(double v);

// coordinate list `row,col,re,im` with header `# dim=<N>`, sorted row-major
void write_operator_csv(const std::string& path, const SparseOp& op);
SparseOp read_operator_csv(const std::string& path);

// rectangular numeric table with a comma-separated header line
void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a, used for the content hashes recorded in metadata sidecars
std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

// TORICSIM_THREADS if set (>=1), else hardware concurrency
int thread_count();

// runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// worker exception.  Callers write results into per-index slots, so output
// never depends on scheduling order.
void parallel_for(long long n, const std::function<void(long long)>& fn, int threads = 0);

}  // namespace toricsim
