// Boolean datasets: file format, text booleanizer and synthetic generators.
//
// Dataset file format (UTF-8 text):
//
//   # comment
//   <K>
//   <label> <idx_1> <idx_2> ...
//
// The first non-comment line holds the feature count K >= 1. Every other
// non-empty line is one sample: a decimal class id followed by the strictly
// increasing indices of its true features. Text after '#' is ignored, except
// that a whole-line comment of the form `# label <id> <name>` records a
// display name for a class.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctm/errors.hpp"
#include "ctm/sample.hpp"

namespace ctm {

struct Dataset {
  std::size_t n_features = 0;
  std::vector<BoolSample> samples;
  std::map<Label, std::string> label_names;

  /// Distinct labels, ascending.
  std::vector<Label> labels() const {
    std::set<Label> seen;
    for (const auto& s : samples) seen.insert(s.label);
    return {seen.begin(), seen.end()};
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

inline Dataset read_dataset(std::istream& in) {
  Dataset d;
  bool have_header = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      auto comment = detail::split_ws(line.substr(hash + 1));
      if (detail::trim(line.substr(0, hash)).empty() && comment.size() >= 3 && comment[0] == "label") {
        Label id = 0;
        if (!detail::parse_int(comment[1], id)) throw FormatError("bad label id in label comment", line_no);
        auto name_start = line.find(comment[2], hash);
        d.label_names[id] = std::string(detail::trim(line.substr(name_start)));
      }
      line = line.substr(0, hash);
    }
    auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (!have_header) {
      std::size_t k = 0;
      if (fields.size() != 1 || !detail::parse_int(fields[0], k)) {
        throw FormatError("expected feature count", line_no);
      }
      if (k == 0) throw FormatError("feature count must be >= 1", line_no);
      d.n_features = k;
      have_header = true;
      continue;
    }
    BoolSample s;
    if (!detail::parse_int(fields[0], s.label)) throw FormatError("bad label '" + std::string(fields[0]) + "'", line_no);
    s.features.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::uint32_t idx = 0;
      if (!detail::parse_int(fields[i], idx)) throw FormatError("bad feature index '" + std::string(fields[i]) + "'", line_no);
      if (idx >= d.n_features) {
        throw FormatError("feature index " + std::to_string(idx) + " >= K = " + std::to_string(d.n_features), line_no);
      }
      if (!s.features.empty() && idx <= s.features.back()) {
        throw FormatError("feature indices must be strictly increasing", line_no);
      }
      s.features.push_back(idx);
    }
    d.samples.push_back(std::move(s));
  }
  if (!have_header) throw FormatError("missing feature count header");
  return d;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  try {
    return read_dataset(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  for (const auto& [id, name] : d.label_names) out << "# label " << id << ' ' << name << '\n';
  out << d.n_features << '\n';
  for (const auto& s : d.samples) {
    out << s.label;
    for (auto f : s.features) out << ' ' << f;
    out << '\n';
  }
}

inline void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  write_dataset(out, d);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Text booleanizer
// ---------------------------------------------------------------------------

struct BooleanizerConfig {
  std::size_t vocabulary_size = 2000;
};

struct LabeledText {
  Label label = 0;
  std::string text;
};

/// Lower-cases ASCII and splits on runs of non-alphanumeric characters.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Top `size` tokens by document frequency, ties broken lexicographically.
  /// Feature index = rank.
  static Vocabulary fit(const std::vector<LabeledText>& docs, std::size_t size) {
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& d : docs) {
      auto toks = tokenize(d.text);
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      for (auto& t : toks) ++df[std::move(t)];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (ranked.size() > size) ranked.resize(size);
    Vocabulary v;
    for (auto& [tok, count] : ranked) {
      v.index_.emplace(tok, static_cast<std::uint32_t>(v.tokens_.size()));
      v.tokens_.push_back(std::move(tok));
    }
    return v;
  }

  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  /// Sorted indices of vocabulary tokens present in `text`.
  std::vector<std::uint32_t> encode(std::string_view text) const {
    std::vector<std::uint32_t> on;
    for (const auto& t : tokenize(text)) {
      if (auto it = index_.find(t); it != index_.end()) on.push_back(it->second);
    }
    std::sort(on.begin(), on.end());
    on.erase(std::unique(on.begin(), on.end()), on.end());
    return on;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct BooleanizedCorpus {
  Dataset train;
  Dataset test;
  Vocabulary vocabulary;
};

/// Fits the vocabulary on `train` only and encodes both splits as presence bits.
inline BooleanizedCorpus booleanize_corpus(const std::vector<LabeledText>& train,
                                           const std::vector<LabeledText>& test,
                                           const BooleanizerConfig& config) {
  if (train.empty()) throw std::invalid_argument("training corpus is empty");
  if (config.vocabulary_size == 0) throw std::invalid_argument("vocabulary size must be positive");
  BooleanizedCorpus out;
  out.vocabulary = Vocabulary::fit(train, config.vocabulary_size);
  // An all-unseen corpus still yields a valid (K >= 1) dataset.
  const std::size_t k = std::max<std::size_t>(out.vocabulary.size(), 1);
  auto encode = [&](const std::vector<LabeledText>& docs) {
    Dataset d;
    d.n_features = k;
    d.samples.reserve(docs.size());
    for (const auto& doc : docs) d.samples.push_back({out.vocabulary.encode(doc.text), doc.label});
    return d;
  };
  out.train = encode(train);
  out.test = encode(test);
  return out;
}

/// Raw `<label>\t<text>` lines.
inline std::vector<std::pair<std::string, std::string>> read_text_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open text corpus '" + path + "'");
  std::vector<std::pair<std::string, std::string>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    const auto tab = raw.find('\t');
    if (tab == std::string::npos) throw FormatError(path + ": expected <label>\\t<text>", line_no);
    auto label = detail::trim(std::string_view(raw).substr(0, tab));
    if (label.empty()) throw FormatError(path + ": empty label", line_no);
    rows.emplace_back(std::string(label), raw.substr(tab + 1));
  }
  return rows;
}

struct LabeledCorpora {
  std::vector<LabeledText> train;
  std::vector<LabeledText> test;
  std::map<Label, std::string> label_names;
};

/// Maps label strings to class ids. Purely numeric labels are used as-is;
/// otherwise ids follow the sorted order of the training label names.
inline LabeledCorpora assign_labels(const std::vector<std::pair<std::string, std::string>>& train,
                                    const std::vector<std::pair<std::string, std::string>>& test) {
  LabeledCorpora out;
  bool numeric = true;
  for (const auto* rows : {&train, &test}) {
    for (const auto& [label, text] : *rows) {
      Label tmp = 0;
      numeric = numeric && detail::parse_int(label, tmp);
    }
  }
  std::map<std::string, Label> ids;
  if (!numeric) {
    std::set<std::string> names;
    for (const auto& [label, text] : train) names.insert(label);
    for (const auto& n : names) {
      const auto id = static_cast<Label>(ids.size());
      ids.emplace(n, id);
      out.label_names.emplace(id, n);
    }
  }
  auto convert = [&](const std::vector<std::pair<std::string, std::string>>& rows) {
    std::vector<LabeledText> docs;
    docs.reserve(rows.size());
    for (const auto& [label, text] : rows) {
      Label id = 0;
      if (numeric) {
        detail::parse_int(label, id);
      } else {
        auto it = ids.find(label);
        if (it == ids.end()) throw std::invalid_argument("label '" + label + "' does not occur in the training corpus");
        id = it->second;
      }
      docs.push_back({id, text});
    }
    return docs;
  };
  out.train = convert(train);
  out.test = convert(test);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Uniform random bits labelled by (feature 0 AND NOT feature 1), each label
/// flipped independently with probability `noise_rate`. Uses raw
/// mt19937_64 output so the stream is identical on every platform.
inline Dataset synth_noisy_conjunction(std::size_t n_samples, std::size_t n_features,
                                       double noise_rate, std::uint64_t seed) {
  if (n_features < 2) throw std::invalid_argument("noisy conjunction needs K >= 2");
  if (!(noise_rate >= 0.0 && noise_rate < 0.5)) throw std::invalid_argument("noise rate must lie in [0, 0.5)");
  std::mt19937_64 gen(seed);
  Dataset d;
  d.n_features = n_features;
  d.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    BoolSample s;
    bool x0 = false;
    bool x1 = false;
    for (std::uint32_t k = 0; k < n_features; ++k) {
      const bool bit = (gen() >> 63) != 0;
      if (k == 0) x0 = bit;
      if (k == 1) x1 = bit;
      if (bit) s.features.push_back(k);
    }
    bool label = x0 && !x1;
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    if (u < noise_rate) label = !label;
    s.label = label ? 1 : 0;
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace ctm
