#pragma once

// Plain-text model and trace files.
//
// Model file (version 1):
//   droboost-model 1
//   algorithm <name>
//   loss <exp|logistic>
//   delta <real|nan>
//   n_features <d>
//   terms <T>
//   then per term: "term <coefficient> <node count>" followed by the tree's
//   nodes in preorder, each "split <feature> <threshold>" or "leaf <value>".
//   end
//
// Reals are written in shortest round-trip form, so a saved model predicts
// bit-identically after reloading.

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "droboost/boost.hpp"
#include "droboost/core.hpp"

namespace droboost {

struct Model {
  std::string algorithm = "dro";
  LossKind loss = LossKind::exponential;
  double delta = 0.0;
  Ensemble ensemble;
};

void write_model(std::ostream& out, const Model& model);
/// Throws DataError on malformed input.
Model read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

/// Tab-separated, one row per iterate, preceded by "# key=value" header lines.
void write_trace(std::ostream& out, const TrainTrace& trace);

std::string format_real(double value);

}  // namespace droboost
