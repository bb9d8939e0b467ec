#pragma once

// DNA alphabet, sequence values, and the shift alignment every constraint is
// built on. All types here are immutable values.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace svsdna {

/// A, C, G, T encoded so that complement(b) == 3 - b.
enum class Base : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

inline constexpr Base kBases[4] = {Base::A, Base::C, Base::G, Base::T};

constexpr Base complement(Base b) noexcept {
  return static_cast<Base>(3 - static_cast<std::uint8_t>(b));
}

constexpr char to_char(Base b) noexcept { return "ACGT"[static_cast<std::uint8_t>(b)]; }

constexpr std::optional<Base> base_from_char(char c) noexcept {
  switch (c) {
    case 'A': case 'a': return Base::A;
    case 'C': case 'c': return Base::C;
    case 'G': case 'g': return Base::G;
    case 'T': case 't': return Base::T;
    default: return std::nullopt;
  }
}

/// Raised for malformed sequence text. `position` is 1-based within the
/// offending text; `line` is 1-based within a file (0 when not from a file).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position, std::size_t line = 0)
      : std::runtime_error(what), position_(position), line_(line) {}
  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t position_;
  std::size_t line_;
};

/// Raised when inputs are well formed but outside an operation's domain
/// (too short, too long, a set too small to compare, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Validated 5'->3' base string. Never empty, never contains gaps.
class DnaSequence {
 public:
  explicit DnaSequence(std::vector<Base> bases) : bases_(std::move(bases)) {
    if (bases_.empty()) throw std::invalid_argument("DnaSequence must contain at least one base");
  }

  std::size_t size() const noexcept { return bases_.size(); }
  Base operator[](std::size_t i) const noexcept { return bases_[i]; }
  const std::vector<Base>& bases() const noexcept { return bases_; }
  auto begin() const noexcept { return bases_.begin(); }
  auto end() const noexcept { return bases_.end(); }

  std::string str() const {
    std::string out(bases_.size(), 'A');
    for (std::size_t i = 0; i < bases_.size(); ++i) out[i] = to_char(bases_[i]);
    return out;
  }

  /// Copy with position i replaced.
  DnaSequence with_base(std::size_t i, Base b) const {
    auto copy = bases_;
    copy.at(i) = b;
    return DnaSequence(std::move(copy));
  }

  friend bool operator==(const DnaSequence&, const DnaSequence&) = default;
  friend auto operator<=>(const DnaSequence&, const DnaSequence&) = default;

 private:
  std::vector<Base> bases_;
};

/// Parses text into a sequence. Whitespace is skipped, lowercase accepted.
inline DnaSequence parse_sequence(std::string_view text) {
  std::vector<Base> bases;
  bases.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    auto b = base_from_char(c);
    if (!b) {
      std::ostringstream msg;
      msg << "invalid base '" << c << "' at position " << (i + 1);
      throw ParseError(msg.str(), i + 1);
    }
    bases.push_back(*b);
  }
  if (bases.empty()) throw ParseError("empty sequence", 0);
  return DnaSequence(std::move(bases));
}

inline DnaSequence reverse_complement(const DnaSequence& s) {
  std::vector<Base> out(s.size(), Base::A);
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = complement(s[s.size() - 1 - i]);
  return DnaSequence(std::move(out));
}

inline DnaSequence reversed(const DnaSequence& s) {
  return DnaSequence(std::vector<Base>(s.bases().rbegin(), s.bases().rend()));
}

struct Run {
  Base base;
  std::size_t length;
  friend bool operator==(const Run&, const Run&) = default;
};

/// Maximal runs of identical bases, in order.
inline std::vector<Run> runs(const DnaSequence& s) {
  std::vector<Run> out;
  for (Base b : s) {
    if (!out.empty() && out.back().base == b)
      ++out.back().length;
    else
      out.push_back({b, 1});
  }
  return out;
}

/// A position in an alignment: a base or a gap (nullopt).
using Symbol = std::optional<Base>;

/// Pairs x_i with y_{i-k} for every position i of x; positions with no
/// partner in y are paired with a gap. Sequences may differ in length.
inline std::vector<std::pair<Symbol, Symbol>> aligned_pairs(const DnaSequence& x,
                                                            const DnaSequence& y, int k) {
  std::vector<std::pair<Symbol, Symbol>> out;
  out.reserve(x.size());
  const long m = static_cast<long>(y.size());
  for (long i = 0; i < static_cast<long>(x.size()); ++i) {
    const long j = i - k;
    out.emplace_back(x[static_cast<std::size_t>(i)],
                     (j >= 0 && j < m) ? Symbol{y[static_cast<std::size_t>(j)]} : Symbol{});
  }
  return out;
}

struct NamedSequence {
  std::string name;
  DnaSequence sequence;
};

/// Reads a plain or FASTA-style sequence list from a stream. Lines starting
/// with '>' name the following sequence; '#' lines are metadata and ignored.
/// Unnamed sequences are labelled S1, S2, ... by position.
inline std::vector<NamedSequence> read_sequences(std::istream& in, const std::string& source = "<input>") {
  std::vector<NamedSequence> out;
  std::string line;
  std::string pending_name;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    while (!view.empty() && std::isspace(static_cast<unsigned char>(view.front()))) view.remove_prefix(1);
    while (!view.empty() && std::isspace(static_cast<unsigned char>(view.back()))) view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '>') {
      view.remove_prefix(1);
      pending_name = std::string(view.substr(0, view.find_first_of(" \t")));
      continue;
    }
    try {
      auto seq = parse_sequence(view);
      std::string name = pending_name.empty() ? "S" + std::to_string(out.size() + 1) : pending_name;
      out.push_back({std::move(name), std::move(seq)});
      pending_name.clear();
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what(), e.position(), lineno);
    }
  }
  if (out.empty()) throw ParseError(source + ": no sequences found", 0, lineno);
  return out;
}

inline std::vector<NamedSequence> read_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_sequences(in, path);
}

inline std::vector<DnaSequence> sequences_of(const std::vector<NamedSequence>& named) {
  std::vector<DnaSequence> out;
  out.reserve(named.size());
  for (const auto& n : named) out.push_back(n.sequence);
  return out;
}

}  // namespace svsdna
