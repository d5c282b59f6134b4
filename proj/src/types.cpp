#include "affmetric/types.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <unordered_map>

namespace affmetric {

std::vector<TupleType> enumerate_types(int n, int cap) {
  if (n < 1) throw std::invalid_argument("type length must be positive");
  if (cap < 1) throw std::invalid_argument("label cap must be positive");
  std::vector<TupleType> out;
  for_each_type(n, cap, [&](const TupleType& t) { out.push_back(t); });
  return out;
}

std::uint64_t count_types(int n, int cap) {
  if (n < 1) throw std::invalid_argument("type length must be positive");
  if (cap < 1) throw std::invalid_argument("label cap must be positive");
  // Stirling numbers of the second kind, summed over at most cap blocks.
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next(i + 1, 0);
    for (int k = 1; k <= i; ++k) {
      std::uint64_t keep = k < static_cast<int>(row.size()) ? row[k] * k : 0;
      std::uint64_t open = row[k - 1];
      next[k] = keep + open;
    }
    row = std::move(next);
  }
  std::uint64_t total = 0;
  for (int k = 1; k <= std::min(n, cap); ++k) total += row[k];
  return total;
}

bool is_valid_type(const TupleType& t) {
  if (t.empty() || t[0] != 0) return false;
  int mx = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < 0 || t[i] > mx + 1) return false;
    mx = std::max(mx, t[i]);
  }
  return true;
}

TupleType type_of(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("type_of needs a non-empty sequence");
  std::unordered_map<int, int> seen;
  TupleType out;
  out.reserve(labels.size());
  for (int x : labels) {
    auto [it, inserted] = seen.emplace(x, static_cast<int>(seen.size()));
    out.push_back(it->second);
  }
  return out;
}

int class_count(const TupleType& t) { return t.empty() ? 0 : *std::max_element(t.begin(), t.end()) + 1; }

int eval_dn(const TupleType& t) {
  if (t.size() % 2 != 0) throw std::invalid_argument("eval_dn needs an even-length type");
  std::size_t n = t.size() / 2;
  for (std::size_t i = 0; i < n; ++i)
    if (t[i] != t[n + i]) return 1;
  return 0;
}

std::string render_type(const TupleType& t) {
  bool digits = std::all_of(t.begin(), t.end(), [](int x) { return x >= 0 && x <= 9; });
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (digits) {
      out += static_cast<char>('0' + t[i]);
    } else {
      if (i) out += ',';
      out += std::to_string(t[i]);
    }
  }
  return out;
}

TupleType parse_type(std::string_view text) {
  TupleType t;
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view part = text.substr(start, end - start);
      int v = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
        throw std::invalid_argument("malformed type '" + std::string(text) + "'");
      t.push_back(v);
      start = end + 1;
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw std::invalid_argument("malformed type '" + std::string(text) + "'");
      t.push_back(c - '0');
    }
  }
  if (!is_valid_type(t)) throw std::invalid_argument("'" + std::string(text) + "' is not a canonical type");
  return t;
}

std::uint64_t bell_number(int n) { return n == 0 ? 1 : count_types(n, n); }

}  // namespace affmetric
