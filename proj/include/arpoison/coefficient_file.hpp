#pragma once

#include <filesystem>
#include <string>

#include "arpoison/process_set.hpp"

namespace arpoison {

/// Sum tolerance for coefficient blocks loaded from files we did not write
/// ourselves (four-decimal published listings).
inline constexpr double kFixtureSumTolerance = 5e-3;
/// Sum tolerance for sets produced by the search.
inline constexpr double kSearchSumTolerance = 1e-9;

/// JSON document holding K x C x V x V nested arrays. Each V x V block is in
/// filter layout, [[b_p ... ], ..., [..., b_1, 0]], i.e. the AR filter with
/// the final -1 replaced by 0, exactly like the published listing.
std::string serialize_process_set(const ARProcessSet& set);
ARProcessSet parse_process_set(const std::string& text);

void save_process_set(const ARProcessSet& set, const std::filesystem::path& path);
ARProcessSet load_process_set(const std::filesystem::path& path);

/// Loads `spec`, where the literal "published" selects the bundled set.
ARProcessSet resolve_process_set(const std::string& spec);

/// SHA-256 of the canonical serialization.
std::string process_set_hash(const ARProcessSet& set);

}  // namespace arpoison
