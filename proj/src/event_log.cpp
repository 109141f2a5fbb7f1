#include "hawkes/event_log.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "hawkes/errors.hpp"

namespace hawkes {

std::size_t EventLog::count_until(double t) const {
  return static_cast<std::size_t>(
      std::upper_bound(events.begin(), events.end(), t,
                       [](double v, const EventRecord& e) { return v < e.t; }) -
      events.begin());
}

std::size_t EventLog::count_before(double t) const {
  return static_cast<std::size_t>(
      std::lower_bound(events.begin(), events.end(), t,
                       [](const EventRecord& e, double v) { return e.t < v; }) -
      events.begin());
}

std::vector<double> EventLog::times() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.t);
  return out;
}

void check_event_log(const EventLog& log) {
  double prev = 0.0;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    if (!(e.t > prev) || e.t > log.horizon) {
      std::ostringstream msg;
      msg << "event log: event " << i << " at t = " << e.t
          << " breaks strict order within (0, " << log.horizon << "]";
      throw Error(msg.str());
    }
    if (e.pop != log.events.front().pop) {
      throw Error("event log: mixed population tags");
    }
    prev = e.t;
  }
}

void write_event_csv(std::ostream& out, const EventLog& log) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "t,mark,gen,pop\n";
  for (const auto& e : log.events) {
    buf << e.t << ',' << e.mark << ',' << e.gen << ','
        << static_cast<int>(e.pop) << '\n';
  }
  out << buf.str();
}

EventLog read_event_csv(std::istream& in) {
  EventLog log;
  std::string line;
  if (!std::getline(in, line) || line != "t,mark,gen,pop") {
    throw Error("event csv: missing header `t,mark,gen,pop`");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    EventRecord e;
    char c1 = 0, c2 = 0, c3 = 0;
    int pop = 0;
    if (!(row >> e.t >> c1 >> e.mark >> c2 >> e.gen >> c3 >> pop) ||
        c1 != ',' || c2 != ',' || c3 != ',' || (pop != 1 && pop != 2)) {
      std::ostringstream msg;
      msg << "event csv: malformed row at line " << lineno;
      throw Error(msg.str());
    }
    e.pop = static_cast<Population>(pop);
    log.events.push_back(e);
  }
  if (!log.events.empty()) log.horizon = log.events.back().t;
  return log;
}

}  // namespace hawkes
