#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace gibbs::cli {

enum class Format { kJson, kCsv };

struct RunConfig {
  std::string command;
  /// A path to a spec file, or inline DSL / JSON text.
  std::string spec;
  /// 0 picks max(256, largest size).
  std::size_t truncation = 0;
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  std::vector<std::size_t> sizes;
  std::size_t cap = 12;
  Format format = Format::kJson;
  std::string out;
  unsigned workers = 1;
  std::string method = "exact_recursive";
  /// tv: "remainder", "components" or "self-test".
  std::string statistic = "remainder";
  /// diagnose: a file of rational coefficients, one per line, from n = 0.
  std::string series_file;

  /// Everything that determines the output; the worker count is left out.
  nlohmann::json to_json() const;
  std::uint64_t digest() const;
};

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kSpecError = 2;
inline constexpr int kPreconditionError = 3;
inline constexpr int kBudgetError = 4;

/// Parses arguments (argv[0] excluded) and runs the command. Output goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One RFC 4180 record, CRLF-terminated.
std::string csv_record(const std::vector<std::string>& fields);

}  // namespace gibbs::cli
