#ifndef FRACPREDICT_PATHIO_HPP
#define FRACPREDICT_PATHIO_HPP

#include <iosfwd>
#include <string>

#include "fracpredict/sampling.hpp"

namespace fracpredict {

/// CSV layout: header `t_0,t_1,...` carrying the grid times, one row per path.
void export_paths_csv(const PathBatch& batch, std::ostream& out);
PathBatch import_paths_csv(std::istream& in);

/// Compact binary layout (all integers/floats little-endian):
///   bytes 0..3   magic "FPB1"
///   u64          n_paths
///   u64          n_points
///   u64          seed
///   f64[n_points]            grid times
///   f64[n_paths*n_points]    values, row-major (path-major)
void export_paths_fpb1(const PathBatch& batch, std::ostream& out);
PathBatch import_paths_fpb1(std::istream& in);

void write_file(const std::string& path, const std::string& contents);

}  // namespace fracpredict

#endif
