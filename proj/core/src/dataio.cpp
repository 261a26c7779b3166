#include "smg/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "smg/errors.hpp"
#include "smg/random.hpp"

namespace smg {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool parse_real(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

bool parse_index(std::string_view text, std::uint32_t& out) {
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

}  // namespace

ParsedDataset parse_libsvm(std::istream& in) {
  ParsedDataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    SparseSample sample;
    double label = 0.0;
    if (!parse_real(tokens[0], label)) {
      throw ParseError("line " + std::to_string(lineno) + ": unparsable label " + quote(tokens[0]), lineno);
    }
    if (label == 1.0) {
      sample.label = 1;
    } else if (label == -1.0 || label == 0.0) {
      sample.label = -1;
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": label " + quote(tokens[0]) +
                           " is not binary (expected -1, 0, 1 or +1)",
                       lineno);
    }

    sample.features.reserve(tokens.size() - 1);
    std::uint32_t prev = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto tok = tokens[k];
      const auto colon = tok.find(':');
      std::uint32_t index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_index(tok.substr(0, colon), index) ||
          !parse_real(tok.substr(colon + 1), value)) {
        throw ParseError("line " + std::to_string(lineno) + ": unparsable feature " + quote(tok), lineno);
      }
      if (index == 0) {
        throw ParseError("line " + std::to_string(lineno) + ": feature indices are 1-based", lineno);
      }
      if (index <= prev) {
        throw ParseError("line " + std::to_string(lineno) + ": feature index " + std::to_string(index) +
                             " does not increase",
                         lineno);
      }
      prev = index;
      sample.features.push_back({index, value});
    }
    out.d = std::max<std::size_t>(out.d, prev);
    out.samples.push_back(std::move(sample));
  }
  return out;
}

ParsedDataset load_libsvm_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string(), path.string());
  return parse_libsvm(in);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string(), path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

DatasetMeta describe_dataset(const std::filesystem::path& path, const ParsedDataset& data) {
  DatasetMeta meta;
  meta.name = path.filename().string();
  meta.n = data.samples.size();
  meta.d = data.d;
  meta.source = path.string();
  if (std::filesystem::exists(path)) meta.checksum = file_checksum(path);
  return meta;
}

nlohmann::json to_json(const DatasetMeta& meta) {
  nlohmann::json j{{"name", meta.name}, {"n", meta.n}, {"d", meta.d}, {"source", meta.source}};
  j["checksum"] = meta.checksum ? nlohmann::json(*meta.checksum) : nlohmann::json(nullptr);
  return j;
}

Vector planted_normal(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw InvalidArgument("planted_normal: d must be >= 1");
  Rng rng(seed, Stream::kDataset);
  Vector w(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = rng.normal();
  return w / w.norm();
}

std::vector<SparseSample> synth_binary_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                               double separability) {
  if (n == 0 || d == 0) throw InvalidArgument("synth_binary_dataset: n and d must be >= 1");
  if (!(separability >= 0.0 && separability <= 1.0)) {
    throw InvalidArgument("synth_binary_dataset: separability must lie in [0, 1]");
  }
  const Vector normal = planted_normal(d, seed);
  Rng rng(derive_seed(seed, 1), Stream::kDataset);
  const double flip = 0.5 * (1.0 - separability);

  std::vector<SparseSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SparseSample s;
    s.features.reserve(d);
    double margin = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double x = rng.normal();
      margin += x * normal[static_cast<Eigen::Index>(j)];
      s.features.push_back({static_cast<std::uint32_t>(j + 1), x});
    }
    s.label = margin >= 0.0 ? 1 : -1;
    if (rng.uniform01() < flip) s.label = -s.label;
    out.push_back(std::move(s));
  }
  return out;
}

void scale_features(std::vector<SparseSample>& samples, std::size_t d) {
  std::vector<double> peak(d + 1, 0.0);
  for (const auto& s : samples)
    for (const auto& f : s.features) peak[f.index] = std::max(peak[f.index], std::abs(f.value));
  for (auto& s : samples)
    for (auto& f : s.features)
      if (peak[f.index] > 0.0) f.value /= peak[f.index];
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (!parse_real(text, v)) throw InvalidArgument("not a number: " + quote(text));
  return v;
}

std::string trace_csv(const RunRecord& record) {
  std::string out = "epoch,eta,loss,grad_norm_sq\n";
  for (const auto& r : record.rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.grad_norm_sq);
    out += '\n';
  }
  return out;
}

std::vector<TraceRow> parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "epoch,eta,loss,grad_norm_sq") {
    throw ParseError("trace: missing header", 1);
  }
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view view(line);
    std::size_t start = 0;
    for (std::size_t i = 0; i <= view.size(); ++i) {
      if (i == view.size() || view[i] == ',') {
        cells.push_back(view.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() != 4) throw ParseError("trace: expected 4 columns", lineno);
    TraceRow row;
    std::uint32_t epoch = 0;
    if (!parse_index(cells[0], epoch)) throw ParseError("trace: bad epoch", lineno);
    row.epoch = epoch;
    try {
      row.eta = parse_double(cells[1]);
      row.loss = parse_double(cells[2]);
      row.grad_norm_sq = parse_double(cells[3]);
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("trace: ") + e.what(), lineno);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string(), path.string());
  return parse_trace_csv(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string(), path.string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string(), path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string(), path.string());
}

nlohmann::json to_json(const BoundReport& r) {
  const auto& c = r.constants_used;
  nlohmann::json constants{
      {"L", c.L},
      {"theta", c.theta},
      {"sigma_sq", c.sigma_sq},
      {"G", c.G ? nlohmann::json(*c.G) : nlohmann::json(nullptr)},
      {"beta", c.beta},
      {"n", c.n},
      {"f_initial", c.f_initial},
      {"grad_norm_sq_initial", c.grad_norm_sq_initial},
      {"f_lower", c.f_lower},
      {"eta1", c.eta1},
      {"sums",
       {{"sum_eta", c.sums.sum_eta},
        {"sum_eta_prev_cubed", c.sums.sum_eta_prev_cubed},
        {"sum_xi_cubed", c.sums.sum_xi_cubed}}},
  };
  return {{"theorem", std::string(to_string(r.theorem))},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"constants_used", constants},
          {"premises_met", r.premises_met},
          {"satisfied", r.satisfied},
          {"slack", r.slack},
          {"samples", r.samples},
          {"standard_error", r.standard_error},
          {"message", r.message}};
}

nlohmann::json to_json(const IdentityReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"max_deviation", c.max_deviation},
                      {"applicable", c.applicable},
                      {"passed", c.passed},
                      {"note", c.note}});
  }
  return {{"checks", checks}, {"all_passed", report.all_passed()}};
}

nlohmann::json to_json(const RateFit& fit) {
  return {{"horizons", fit.horizons},
          {"metrics", fit.metrics},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"low_confidence", fit.low_confidence}};
}

void write_trace(const RunRecord& record, const std::filesystem::path& stem,
                 const nlohmann::json& config, const BoundReport* report) {
  auto csv_path = stem;
  csv_path += ".csv";
  auto json_path = stem;
  json_path += ".json";
  write_text_file(csv_path, trace_csv(record));

  nlohmann::json side{{"config_hash", record.config_hash},
                      {"seed", record.seed},
                      {"algorithm", std::string(to_string(record.algorithm))},
                      {"strategy", std::string(to_string(record.strategy.kind))},
                      {"epochs", record.rows.size()},
                      {"selected_index", record.selected_index},
                      {"final_loss", record.final_loss},
                      {"final_grad_norm_sq", record.final_grad_norm_sq},
                      {"weighted_grad_norm_sq", record.weighted_grad_norm_sq()}};
  if (!config.is_null()) side["config"] = config;
  if (report) side["bound_report"] = to_json(*report);
  write_text_file(json_path, side.dump(2) + "\n");
}

}  // namespace smg
