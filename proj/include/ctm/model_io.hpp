// Line-oriented model file.
//
//   CTM v1
//   features <K>
//   states_per_action <N>
//   exclude_barrier <b|none>
//   include_barrier <b|none>
//   clauses_per_class <S>
//   threshold <T>
//   specificity <s>
//   max_included_literals <n|none>
//   literal_sample_fraction <f>
//   boost_true_positive <0|1>
//   initial_live_ta <n>
//   absorbed_exclude <n>
//   absorbed_include <n>
//   classes <M>
//   class <label>
//   clause <j> <+|->
//   P: <id> ...
//   I: (<id>,<state>) ...
//   E: (<id>,<state>) ...
//   ...
//   end
//
// Clauses are listed positive first, S per class. List order is preserved.
// Reals are written in shortest round-trip form.

#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ctm/data.hpp"
#include "ctm/errors.hpp"
#include "ctm/learner.hpp"

namespace ctm {

inline constexpr std::string_view kModelMagic = "CTM";
inline constexpr std::string_view kModelVersion = "v1";

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string format_optional(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::size_t line() const { return line_; }

  std::string_view next() {
    while (std::getline(in_, buf_)) {
      ++line_;
      auto t = trim(buf_);
      if (!t.empty()) return t;
    }
    throw FormatError("unexpected end of model file", line_ + 1);
  }

  /// Reads `<key> <value>` and returns the value.
  std::string_view field(std::string_view key) {
    auto l = next();
    auto parts = split_ws(l);
    if (parts.size() != 2 || parts[0] != key) fail("expected '" + std::string(key) + " <value>'");
    return parts[1];
  }

  template <typename Int>
  Int integer(std::string_view key) {
    Int v{};
    auto s = field(key);
    if (!parse_int(s, v)) fail("bad integer for " + std::string(key));
    return v;
  }

  template <typename Int>
  std::optional<Int> optional_integer(std::string_view key) {
    auto s = field(key);
    if (s == "none") return std::nullopt;
    Int v{};
    if (!parse_int(s, v)) fail("bad value for " + std::string(key));
    return v;
  }

  double real(std::string_view key) {
    auto s = field(key);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad real for " + std::string(key));
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, line_); }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_ = 0;
};

inline std::vector<LiteralState> parse_tuples(std::string_view body, const LineReader& r) {
  std::vector<LiteralState> out;
  for (auto tok : split_ws(body)) {
    if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') r.fail("malformed tuple '" + std::string(tok) + "'");
    tok = tok.substr(1, tok.size() - 2);
    const auto comma = tok.find(',');
    if (comma == std::string_view::npos) r.fail("malformed tuple");
    LiteralState t{};
    if (!parse_int(tok.substr(0, comma), t.literal) || !parse_int(tok.substr(comma + 1), t.state)) {
      r.fail("malformed tuple");
    }
    out.push_back(t);
  }
  return out;
}

inline std::string_view expect_prefix(std::string_view line, std::string_view prefix, const LineReader& r) {
  if (line.substr(0, prefix.size()) != prefix) r.fail("expected '" + std::string(prefix) + "'");
  return line.substr(prefix.size());
}

}  // namespace detail

inline void write_model(std::ostream& out, const Model& m) {
  const auto& c = m.automaton_config();
  const auto& h = m.hyper();
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "features " << m.n_features() << '\n';
  out << "states_per_action " << c.states_per_action << '\n';
  out << "exclude_barrier " << detail::format_optional(c.exclude_barrier) << '\n';
  out << "include_barrier " << detail::format_optional(c.include_barrier) << '\n';
  out << "clauses_per_class " << h.clauses_per_class << '\n';
  out << "threshold " << h.threshold << '\n';
  out << "specificity " << detail::format_real(h.specificity) << '\n';
  out << "max_included_literals " << detail::format_optional(h.max_included_literals) << '\n';
  out << "literal_sample_fraction " << detail::format_real(h.literal_sample_fraction) << '\n';
  out << "boost_true_positive " << (h.boost_true_positive ? 1 : 0) << '\n';
  out << "initial_live_ta " << m.counters().initial_live_ta << '\n';
  out << "absorbed_exclude " << m.counters().absorbed_exclude << '\n';
  out << "absorbed_include " << m.counters().absorbed_include << '\n';
  out << "classes " << m.classes().size() << '\n';
  for (const auto& [label, bank] : m.classes()) {
    out << "class " << label << '\n';
    std::uint32_t j = 0;
    auto emit = [&](const SparseClause& cl) {
      out << "clause " << j++ << ' ' << (cl.polarity() == Polarity::Positive ? '+' : '-') << '\n';
      out << "P:";
      for (auto l : cl.permanent()) out << ' ' << l;
      out << "\nI:";
      for (const auto& t : cl.included()) out << " (" << t.literal << ',' << t.state << ')';
      out << "\nE:";
      for (const auto& t : cl.excluded()) out << " (" << t.literal << ',' << t.state << ')';
      out << '\n';
    };
    for (const auto& cl : bank.positive) emit(cl);
    for (const auto& cl : bank.negative) emit(cl);
  }
  out << "end\n";
}

inline Model read_model(std::istream& in) {
  detail::LineReader r(in);
  {
    auto parts = detail::split_ws(r.next());
    if (parts.size() != 2 || parts[0] != kModelMagic) r.fail("not a model file");
    if (parts[1] != kModelVersion) r.fail("unsupported model version '" + std::string(parts[1]) + "'");
  }
  const auto n_features = r.integer<std::size_t>("features");
  AutomatonConfig config;
  config.states_per_action = r.integer<TaState>("states_per_action");
  config.exclude_barrier = r.optional_integer<TaState>("exclude_barrier");
  config.include_barrier = r.optional_integer<TaState>("include_barrier");
  HyperParams hyper;
  hyper.clauses_per_class = r.integer<std::uint32_t>("clauses_per_class");
  hyper.threshold = r.integer<std::int32_t>("threshold");
  hyper.specificity = r.real("specificity");
  hyper.max_included_literals = r.optional_integer<std::uint32_t>("max_included_literals");
  hyper.literal_sample_fraction = r.real("literal_sample_fraction");
  hyper.boost_true_positive = r.integer<int>("boost_true_positive") != 0;
  AbsorptionCounters counters;
  counters.initial_live_ta = r.integer<std::uint64_t>("initial_live_ta");
  counters.absorbed_exclude = r.integer<std::uint64_t>("absorbed_exclude");
  counters.absorbed_include = r.integer<std::uint64_t>("absorbed_include");

  std::optional<Model> model;
  try {
    model.emplace(n_features, config, hyper);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  model->counters() = counters;

  const auto n_classes = r.integer<std::size_t>("classes");
  const std::uint32_t half = hyper.clauses_per_class / 2;
  for (std::size_t ci = 0; ci < n_classes; ++ci) {
    const auto label = r.integer<Label>("class");
    if (model->has_class(label)) r.fail("duplicate class " + std::to_string(label));
    ClassBank bank;
    for (std::uint32_t j = 0; j < hyper.clauses_per_class; ++j) {
      auto head = detail::split_ws(r.next());
      std::uint32_t idx = 0;
      if (head.size() != 3 || head[0] != "clause" || !detail::parse_int(head[1], idx) || idx != j) {
        r.fail("expected 'clause " + std::to_string(j) + " <polarity>'");
      }
      const bool positive_slot = j < half;
      if (head[2] != (positive_slot ? "+" : "-")) r.fail("clause polarity out of order");
      std::vector<LiteralId> permanent;
      for (auto tok : detail::split_ws(detail::expect_prefix(r.next(), "P:", r))) {
        LiteralId l = 0;
        if (!detail::parse_int(tok, l)) r.fail("bad permanent literal");
        permanent.push_back(l);
      }
      auto included = detail::parse_tuples(detail::expect_prefix(r.next(), "I:", r), r);
      auto excluded = detail::parse_tuples(detail::expect_prefix(r.next(), "E:", r), r);
      try {
        auto clause = SparseClause::from_lists(positive_slot ? Polarity::Positive : Polarity::Negative, n_features,
                                               std::move(excluded), std::move(included), std::move(permanent), config);
        (positive_slot ? bank.positive : bank.negative).push_back(std::move(clause));
      } catch (const ContractViolation& e) {
        r.fail(e.what());
      }
    }
    model->put_class(label, std::move(bank));
  }
  if (r.next() != "end") r.fail("expected 'end'");
  return std::move(*model);
}

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model '" + path + "'");
  write_model(out, m);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model '" + path + "'");
  return read_model(in);
}

}  // namespace ctm
