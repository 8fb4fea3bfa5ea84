#include "crop/space_saving.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "crop/error.hpp"

namespace crop {
namespace {

// Min-heap order: smallest count first, then least recently updated.
bool heap_after(double ca, std::uint64_t sa, double cb, std::uint64_t sb) {
  return ca != cb ? ca > cb : sa > sb;
}

}  // namespace

SpaceSavingSummary::SpaceSavingSummary(std::uint32_t capacity)
    : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("Space-Saving capacity must be >= 1");
}

std::size_t SpaceSavingSummary::find(const Entry& item) const {
  if (indexed()) {
    auto it = index_.find(item);
    return it == index_.end() ? records_.size() : it->second;
  }
  for (std::size_t s = 0; s < records_.size(); ++s) {
    if (records_[s].item == item) return s;
  }
  return records_.size();
}

std::size_t SpaceSavingSummary::min_slot() const {
  if (!indexed()) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < records_.size(); ++s) {
      const Record& r = records_[s];
      const Record& b = records_[best];
      if (r.count < b.count || (r.count == b.count && r.stamp < b.stamp)) best = s;
    }
    return best;
  }
  auto cmp = [](const HeapNode& x, const HeapNode& y) {
    return heap_after(x.count, x.stamp, y.count, y.stamp);
  };
  // Drop stale nodes: a slot's live node is the one carrying its stamp.
  while (!heap_.empty()) {
    const HeapNode& top = heap_.front();
    if (records_[top.slot].stamp == top.stamp) return top.slot;
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    heap_.pop_back();
  }
  throw std::logic_error("Space-Saving heap empty on a full summary");
}

void SpaceSavingSummary::touch(std::size_t slot) {
  Record& r = records_[slot];
  r.stamp = ++clock_;
  if (!indexed()) return;
  auto cmp = [](const HeapNode& x, const HeapNode& y) {
    return heap_after(x.count, x.stamp, y.count, y.stamp);
  };
  heap_.push_back({r.count, r.stamp, static_cast<std::uint32_t>(slot)});
  std::push_heap(heap_.begin(), heap_.end(), cmp);
  if (heap_.size() > 4 * std::size_t{capacity_} + 16) {
    heap_.clear();
    for (std::size_t s = 0; s < records_.size(); ++s) {
      heap_.push_back({records_[s].count, records_[s].stamp,
                       static_cast<std::uint32_t>(s)});
    }
    std::make_heap(heap_.begin(), heap_.end(), cmp);
  }
}

void SpaceSavingSummary::update(const Entry& item, double weight) {
  if (!(weight > 0.0)) {
    throw ValueError("Space-Saving accepts positive weights only");
  }
  total_weight_ += weight;
  std::size_t slot = find(item);
  if (slot < records_.size()) {
    records_[slot].count += weight;
  } else if (records_.size() < capacity_) {
    slot = records_.size();
    records_.push_back({item, weight, 0.0, 0});
    if (indexed()) index_.emplace(item, static_cast<std::uint32_t>(slot));
  } else {
    slot = min_slot();
    Record& victim = records_[slot];
    if (indexed()) {
      index_.erase(victim.item);
      index_.emplace(item, static_cast<std::uint32_t>(slot));
    }
    const double floor = victim.count;
    victim.item = item;
    victim.over = floor;
    victim.count = floor + weight;
  }
  touch(slot);
}

double SpaceSavingSummary::min_count() const {
  if (records_.empty()) return 0.0;
  double m = records_.front().count;
  for (const Record& r : records_) m = std::min(m, r.count);
  return m;
}

WeightBounds SpaceSavingSummary::query(const Entry& item) const {
  std::size_t slot = find(item);
  if (slot < records_.size()) {
    const Record& r = records_[slot];
    return {r.count - r.over, r.count};
  }
  if (full()) return {0.0, min_count()};
  return {0.0, 0.0};
}

std::vector<RankedItem> SpaceSavingSummary::top(std::size_t k) const {
  std::vector<const Record*> order;
  order.reserve(records_.size());
  for (const Record& r : records_) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const Record* x, const Record* y) {
    if (x->count != y->count) return x->count > y->count;
    return x->item < y->item;
  });
  std::vector<RankedItem> out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    out.push_back({order[i]->item, order[i]->count - order[i]->over,
                   order[i]->count});
  }
  return out;
}

void SpaceSavingSummary::write(std::ostream& out) const {
  out << capacity_ << ' ' << format_double(total_weight_) << ' ' << clock_
      << ' ' << records_.size() << '\n';
  for (const Record& r : records_) {
    out << r.item.row << ' ' << r.item.col << ' ' << format_double(r.count)
        << ' ' << format_double(r.over) << ' ' << r.stamp << '\n';
  }
}

namespace {

double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw ParseError("summary: truncated", 0);
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("summary: bad number `" + token + "`", 0);
  }
}

}  // namespace

SpaceSavingSummary SpaceSavingSummary::read(std::istream& in) {
  std::uint32_t capacity = 0;
  std::size_t size = 0;
  if (!(in >> capacity)) throw ParseError("summary: missing header", 0);
  SpaceSavingSummary s(capacity);
  s.total_weight_ = read_double(in);
  if (!(in >> s.clock_ >> size) || size > capacity) {
    throw ParseError("summary: bad header", 0);
  }
  for (std::size_t k = 0; k < size; ++k) {
    Record r;
    if (!(in >> r.item.row >> r.item.col)) throw ParseError("summary: truncated", 0);
    r.count = read_double(in);
    r.over = read_double(in);
    if (!(in >> r.stamp)) throw ParseError("summary: truncated", 0);
    s.records_.push_back(r);
    if (s.indexed()) {
      s.index_.emplace(r.item, static_cast<std::uint32_t>(k));
    }
  }
  if (s.indexed()) {
    for (std::size_t k = 0; k < s.records_.size(); ++k) {
      s.heap_.push_back({s.records_[k].count, s.records_[k].stamp,
                         static_cast<std::uint32_t>(k)});
    }
    std::make_heap(s.heap_.begin(), s.heap_.end(),
                   [](const HeapNode& x, const HeapNode& y) {
                     return heap_after(x.count, x.stamp, y.count, y.stamp);
                   });
  }
  return s;
}

}  // namespace crop
