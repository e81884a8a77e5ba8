#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "pmdp/model.hpp"

namespace pmdp {

/**
 * Plain-text model format, one record per line, `#` starts a comment:
 *
 *     pmdp-model 1
 *     name <id>
 *     states <|S|>
 *     actions <|A|> <name_0> ... <name_{|A|-1}>
 *     params <|Theta|> <theta_0> ...
 *     reward_bound <R_max>
 *     pair <s> <a> <n_outcomes>            one block per (s, a), row-major
 *     outcome <symbol> <next_state> <reward>  n_outcomes lines
 *     probs <theta_index> <p_0> ... <p_{n-1}>  |Theta| lines
 *     mean_reward <theta_index> <r(0,0)> <r(0,1)> ...  |Theta| lines, |S| x |A| row-major
 *     end
 *
 * Infeasible pairs have n_outcomes = 0 and no outcome/probs lines. Numbers
 * use the shortest decimal form that round-trips, so write then read is
 * bit-exact.
 */
void write_model(std::ostream& os, const PmdpModel& model);
PmdpModel read_model(std::istream& is);

void save_model(const std::filesystem::path& path, const PmdpModel& model);
PmdpModel load_model(const std::filesystem::path& path);

std::string serialize_model(const PmdpModel& model);

/// 64-bit FNV-1a of the serialized model.
std::uint64_t model_hash(const PmdpModel& model);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);
/// Parses a whole token as a double; throws ParseError.
double parse_double(std::string_view token);

}  // namespace pmdp
