#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "droboost/core.hpp"

namespace droboost {

/// UCI "default of credit card clients": ID, 23 predictors, default flag (1/0).
struct UciCreditSchema {};

/// Named label column; cells equal to `positive_value` map to +1, all others to -1.
struct GenericSchema {
  std::string label_column;
  std::string positive_value = "1";
};

using Schema = std::variant<UciCreditSchema, GenericSchema>;

struct CsvOptions {
  /// Leading rows to skip; for the generic schema the last skipped row is the header.
  int skip_rows = 1;
};

inline constexpr std::size_t kUciPredictors = 23;

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Throws DataError on unreadable input, ragged rows, non-numeric feature
/// cells (reporting 1-based row and column), a missing label column, or an
/// empty file.
Dataset read_csv(std::istream& in, const Schema& schema, const CsvOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, const Schema& schema, const CsvOptions& options = {});

/// splitmix64: the generator behind every seeded shuffle in this library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform integer in [0, bound) by 128-bit multiply-high.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Deterministic seed for the k-th independent stream derived from `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

struct SplitSpec {
  std::size_t train_size = 3000;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

/// Fisher-Yates permutation (i from N-1 down to 1, j = below(i + 1)); the
/// first train_size rows form the training set. Throws std::invalid_argument
/// unless 0 < train_size < N.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

}  // namespace droboost
