#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace affmetric {

// Restricted growth string: t[0] = 0 and t[k] <= max(t[0..k-1]) + 1.
using TupleType = std::vector<int>;

// All restricted growth strings of length n with labels < cap, in
// lexicographic order.
std::vector<TupleType> enumerate_types(int n, int cap);
std::uint64_t count_types(int n, int cap);

// Calls visit(t) for each type without materializing the list.
template <typename Visit>
void for_each_type(int n, int cap, Visit&& visit) {
  if (n <= 0 || cap <= 0) return;
  TupleType t(n, 0);
  std::vector<int> prefix_max(n, 0);
  visit(static_cast<const TupleType&>(t));
  while (true) {
    int i = n - 1;
    while (i > 0) {
      int limit = std::min(prefix_max[i - 1] + 1, cap - 1);
      if (t[i] < limit) break;
      --i;
    }
    if (i == 0) return;
    ++t[i];
    prefix_max[i] = std::max(prefix_max[i - 1], t[i]);
    for (int j = i + 1; j < n; ++j) {
      t[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
    visit(static_cast<const TupleType&>(t));
  }
}

bool is_valid_type(const TupleType& t);
// Canonical type with the same equality pattern.
TupleType type_of(const std::vector<int>& labels);
int class_count(const TupleType& t);

// 0 iff the first half equals the second half pointwise.
int eval_dn(const TupleType& t);

// Digit string when every label is at most 9, comma separated otherwise.
std::string render_type(const TupleType& t);
// Accepts either rendering; the result must already be canonical.
TupleType parse_type(std::string_view text);

std::uint64_t bell_number(int n);

}  // namespace affmetric
