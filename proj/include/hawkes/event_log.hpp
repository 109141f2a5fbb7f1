#ifndef HAWKES_EVENT_LOG_HPP
#define HAWKES_EVENT_LOG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hawkes {

enum class Population : int { External = 1, Hawkes = 2 };

struct EventRecord {
  double t = 0.0;
  double mark = 0.0;
  // 0 = immigrant, g + 1 = child of a generation-g parent; -1 when the
  // simulator was not asked to attribute parents.
  int gen = -1;
  Population pop = Population::Hawkes;

  bool operator==(const EventRecord&) const = default;
};

inline constexpr int kUntagged = -1;

struct EventLog {
  std::vector<EventRecord> events;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::string model_id;
  // Set when some event would exceed the requested maximum generation; such
  // events carry gen = max_gen + 1.
  bool generation_overflow = false;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  /// Number of events with time <= t.
  std::size_t count_until(double t) const;
  /// Number of events with time < t.
  std::size_t count_before(double t) const;
  std::vector<double> times() const;

  bool operator==(const EventLog&) const = default;
};

/// Strict time order, times in (0, horizon], uniform population tag.
void check_event_log(const EventLog& log);

/// CSV with header `t,mark,gen,pop`, 17 significant digits, LF line ends.
void write_event_csv(std::ostream& out, const EventLog& log);
EventLog read_event_csv(std::istream& in);

}  // namespace hawkes

#endif  // HAWKES_EVENT_LOG_HPP
