#include "pmdp/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "pmdp/errors.hpp"

namespace pmdp {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_model(std::ostream& os, const PmdpModel& model) {
  const ModelData& d = model.data();
  const std::size_t n_p = model.num_params();
  os << "pmdp-model 1\n";
  os << "name " << (d.name.empty() ? "unnamed" : d.name) << '\n';
  os << "states " << model.num_states() << '\n';
  os << "actions " << model.num_actions();
  for (const auto& name : d.action_names) os << ' ' << name;
  os << '\n';
  os << "params " << n_p;
  for (double v : d.params) os << ' ' << format_double(v);
  os << '\n';
  os << "reward_bound " << format_double(model.reward_bound()) << '\n';
  for (State s = 0; s < model.num_states(); ++s) {
    for (Action a = 0; a < model.num_actions(); ++a) {
      const auto outs = model.outcomes(s, a);
      os << "pair " << s << ' ' << a << ' ' << outs.size() << '\n';
      if (outs.empty()) continue;
      for (const Outcome& o : outs) {
        os << "outcome " << o.symbol << ' ' << o.next_state << ' ' << format_double(o.reward) << '\n';
      }
      for (ParamIndex k = 0; k < n_p; ++k) {
        os << "probs " << k;
        for (double p : model.outcome_probs(k, s, a)) os << ' ' << format_double(p);
        os << '\n';
      }
    }
  }
  for (ParamIndex k = 0; k < n_p; ++k) {
    os << "mean_reward " << k;
    for (State s = 0; s < model.num_states(); ++s) {
      for (Action a = 0; a < model.num_actions(); ++a) os << ' ' << format_double(model.mean_reward(k, s, a));
    }
    os << '\n';
  }
  os << "end\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // Next non-empty, non-comment line split into tokens; empty at EOF.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    return {};
  }

  std::vector<std::string> expect(const std::string& key, std::size_t min_tokens) {
    auto tokens = next();
    if (tokens.empty() || tokens[0] != key || tokens.size() < min_tokens) fail("expected '" + key + "'");
    return tokens;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& is_;
  std::size_t line_no_ = 0;
};

std::size_t to_count(const LineReader& reader, const std::string& token) {
  std::size_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) reader.fail("bad integer '" + token + "'");
  return v;
}

}  // namespace

PmdpModel read_model(std::istream& is) {
  LineReader reader(is);
  auto header = reader.expect("pmdp-model", 2);
  if (header[1] != "1") reader.fail("unsupported model format version " + header[1]);

  ModelData d;
  d.name = reader.expect("name", 2)[1];
  d.num_states = to_count(reader, reader.expect("states", 2)[1]);
  auto actions = reader.expect("actions", 2);
  const std::size_t n_a = to_count(reader, actions[1]);
  if (actions.size() != n_a + 2) reader.fail("action name count mismatch");
  d.action_names.assign(actions.begin() + 2, actions.end());
  auto params = reader.expect("params", 2);
  const std::size_t n_p = to_count(reader, params[1]);
  if (params.size() != n_p + 2) reader.fail("parameter count mismatch");
  for (std::size_t k = 0; k < n_p; ++k) d.params.push_back(parse_double(params[k + 2]));
  d.reward_bound = parse_double(reader.expect("reward_bound", 2)[1]);

  d.pairs.resize(d.num_states * n_a);
  for (State s = 0; s < d.num_states; ++s) {
    for (Action a = 0; a < n_a; ++a) {
      auto pair = reader.expect("pair", 4);
      if (to_count(reader, pair[1]) != s || to_count(reader, pair[2]) != a) reader.fail("pairs out of order");
      const std::size_t n_out = to_count(reader, pair[3]);
      PairTable& table = d.pair(s, a);
      for (std::size_t j = 0; j < n_out; ++j) {
        auto out = reader.expect("outcome", 4);
        table.outcomes.push_back({to_count(reader, out[1]), to_count(reader, out[2]), parse_double(out[3])});
      }
      if (n_out == 0) continue;
      for (ParamIndex k = 0; k < n_p; ++k) {
        auto row = reader.expect("probs", 2);
        if (to_count(reader, row[1]) != k || row.size() != n_out + 2) reader.fail("bad probs row");
        for (std::size_t j = 0; j < n_out; ++j) table.probs.push_back(parse_double(row[j + 2]));
      }
    }
  }
  for (ParamIndex k = 0; k < n_p; ++k) {
    auto row = reader.expect("mean_reward", 2);
    if (to_count(reader, row[1]) != k || row.size() != d.num_states * n_a + 2) reader.fail("bad mean_reward row");
    for (std::size_t i = 2; i < row.size(); ++i) d.mean_reward.push_back(parse_double(row[i]));
  }
  reader.expect("end", 1);
  return PmdpModel(std::move(d));
}

std::string serialize_model(const PmdpModel& model) {
  std::ostringstream os;
  write_model(os, model);
  return os.str();
}

std::uint64_t model_hash(const PmdpModel& model) { return fnv1a64(serialize_model(model)); }

void save_model(const std::filesystem::path& path, const PmdpModel& model) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_model(os, model);
  if (!os) throw IoError("failed writing " + path.string());
}

PmdpModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_model(is);
}

}  // namespace pmdp
