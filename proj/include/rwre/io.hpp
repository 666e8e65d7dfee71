#pragma once

#include <random>
#include <string>

#include "json.hpp"
#include "rwre/correctors.hpp"
#include "rwre/measures.hpp"

namespace rwre {

using nlohmann::json;

json read_json_file(const std::string& path, const char* field);
void write_text_file(const std::string& path, const std::string& text);

/// {d, periods, range, ell} identifying a word space.
json space_header(const WordSpace& space);
/// Throws HeaderMismatch naming the first missing or differing field.
void check_header(const json& doc, const WordSpace& space);

/// Measure file: header fields plus "weights" (dense, canonical order).
WordMeasure load_measure(const json& doc, const WordSpacePtr& space);
json measure_json(const WordMeasure& mu);

/// Tilt file: dense array, array of [state, value] pairs (unlisted states
/// are 0), or an object with "values" and optional header fields.
StateFunction load_tilt(const json& doc, const WordSpace& space);

/// F table: S x |R| nested arrays, a flat array of S*|R| entries, or an
/// object with "table" and optional header fields.
ClassKFunction load_f_table(const json& doc, const WordSpacePtr& space);

json kernel_json(const WordKernel& kernel);
json edge_json(const EdgeMeasure& alpha);

/// Strictly positive random environment with d = 1 and range {+1, -1}
/// or {+1, -1, 0}; entries bounded below by `floor` before normalisation.
PeriodicEnvironment random_environment(std::mt19937_64& rng, std::int64_t period,
                                       std::size_t letters, double floor = 0.05);

}  // namespace rwre
