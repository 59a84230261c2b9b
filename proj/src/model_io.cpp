#include "droboost/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "droboost/errors.hpp"

namespace droboost {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

constexpr const char* kMagic = "droboost-model";
constexpr int kVersion = 1;

double parse_real(const std::string& token, const std::string& what) {
  if (token == "nan") return std::nan("");
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw DataError("model file: bad " + what + " '" + token + "'");
  }
  return value;
}

template <typename T>
T parse_count(const std::string& token, const std::string& what) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw DataError("model file: bad " + what + " '" + token + "'");
  }
  return value;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word(const std::string& what) {
    std::string token;
    if (!(in_ >> token)) throw DataError("model file: unexpected end of input while reading " + what);
    return token;
  }
  void expect(const std::string& keyword) {
    std::string token = word(keyword);
    if (token != keyword) throw DataError("model file: expected '" + keyword + "', found '" + token + "'");
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  const auto& ens = model.ensemble;
  out << kMagic << ' ' << kVersion << '\n';
  out << "algorithm " << model.algorithm << '\n';
  out << "loss " << to_string(model.loss) << '\n';
  out << "delta " << format_real(model.delta) << '\n';
  out << "n_features " << ens.n_features() << '\n';
  out << "terms " << ens.size() << '\n';
  for (const auto& term : ens.terms()) {
    out << "term " << format_real(term.coefficient) << ' ' << term.learner.nodes().size() << '\n';
    for (const auto& node : term.learner.nodes()) {
      if (node.is_leaf()) {
        out << "leaf " << format_real(node.value) << '\n';
      } else {
        out << "split " << node.feature << ' ' << format_real(node.threshold) << '\n';
      }
    }
  }
  out << "end\n";
}

Model read_model(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  if (int version = parse_count<int>(r.word("version"), "version"); version != kVersion) {
    throw DataError("model file: unsupported version " + std::to_string(version));
  }
  Model model;
  r.expect("algorithm");
  model.algorithm = r.word("algorithm");
  r.expect("loss");
  try {
    model.loss = parse_loss_kind(r.word("loss"));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  r.expect("delta");
  model.delta = parse_real(r.word("delta"), "delta");
  r.expect("n_features");
  const auto d = parse_count<std::size_t>(r.word("n_features"), "feature count");
  if (d == 0) throw DataError("model file: feature count must be positive");
  r.expect("terms");
  const auto n_terms = parse_count<std::size_t>(r.word("term count"), "term count");
  model.ensemble = Ensemble(d);
  for (std::size_t t = 0; t < n_terms; ++t) {
    r.expect("term");
    double coefficient = parse_real(r.word("coefficient"), "coefficient");
    const auto n_nodes = parse_count<std::size_t>(r.word("node count"), "node count");
    std::vector<Tree::Node> nodes(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      std::string kind = r.word("node");
      if (kind == "split") {
        nodes[k].feature = parse_count<std::int32_t>(r.word("feature"), "feature");
        nodes[k].threshold = parse_real(r.word("threshold"), "threshold");
        nodes[k].value = 0.0;
        if (nodes[k].feature < 0) throw DataError("model file: negative split feature");
      } else if (kind == "leaf") {
        nodes[k].value = parse_real(r.word("leaf value"), "leaf value");
      } else {
        throw DataError("model file: expected 'split' or 'leaf', found '" + kind + "'");
      }
    }
    // Child links are implied by preorder: left follows the split, right
    // follows the left subtree.
    std::function<std::size_t(std::size_t)> link = [&](std::size_t k) -> std::size_t {
      if (k >= nodes.size()) throw DataError("model file: term " + std::to_string(t) + " has a truncated tree");
      if (nodes[k].is_leaf()) return k + 1;
      nodes[k].left = static_cast<std::int32_t>(k + 1);
      std::size_t after_left = link(k + 1);
      nodes[k].right = static_cast<std::int32_t>(after_left);
      return link(after_left);
    };
    if (link(0) != nodes.size()) throw DataError("model file: term " + std::to_string(t) + " has stray nodes");
    try {
      model.ensemble.append(coefficient, Tree(std::move(nodes), d));
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("model file: term ") + std::to_string(t) + ": " + e.what());
    }
  }
  r.expect("end");
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, model);
  if (!out) throw DataError("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_model(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_trace(std::ostream& out, const TrainTrace& trace) {
  out << "# delta=" << format_real(trace.delta) << '\n';
  out << "iteration\trobust_loss\tempirical_loss\tkl\tbeta\tdelta\tstep\tlearner\n";
  for (const auto& rec : trace.records) {
    out << rec.iteration << '\t' << format_real(rec.robust_loss) << '\t' << format_real(rec.empirical_loss) << '\t'
        << format_real(rec.achieved_kl) << '\t' << (rec.beta_star ? format_real(*rec.beta_star) : "nan") << '\t'
        << format_real(rec.delta) << '\t' << format_real(rec.step) << '\t' << (rec.learner.empty() ? "-" : rec.learner)
        << '\n';
  }
}

}  // namespace droboost
