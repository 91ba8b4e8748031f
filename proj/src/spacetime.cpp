#include "rbl/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "text.hpp"

namespace rbl {

namespace {
constexpr double kNoDecision = -std::numeric_limits<double>::infinity();
constexpr double kAngleTolerance = 1e-12;
}  // namespace

void Geometry::validate() const {
    if (!(separation > 0.0)) throw InvalidArgumentError("separation L must be positive");
    if (!(signal_speed > 0.0)) throw InvalidArgumentError("signal speed c must be positive");
    const double d = light_delay();
    if (!(t0 < t1 - d) || !(t0 < t2 - d)) {
        throw InvalidArgumentError("t0 must precede both t1 - L/c and t2 - L/c");
    }
}

SettingLabel::SettingLabel(std::string label_id, double radians)
    : id(std::move(label_id)), angle(wrap_two_pi(radians)) {}

Palette::Palette(std::vector<SettingLabel> labels) {
    for (const auto& l : labels) intern(l);
}

std::size_t Palette::intern(const SettingLabel& label) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].id != label.id) continue;
        // Compare on the circle so 2π - ε and 0 agree.
        const double diff = std::abs(labels_[i].angle - label.angle);
        if (std::min(diff, kTwoPi - diff) > kAngleTolerance) {
            throw InvalidArgumentError("label '" + label.id + "' used with two different angles");
        }
        return i;
    }
    labels_.push_back(label);
    return labels_.size() - 1;
}

std::optional<std::size_t> Palette::find(std::string_view id) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].id == id) return i;
    }
    return std::nullopt;
}

const SettingLabel& Palette::at(std::string_view id) const {
    if (auto i = find(id)) return labels_[*i];
    throw InvalidArgumentError("unknown setting label '" + std::string(id) + "'");
}

// --- SettingSchedule -------------------------------------------------------

std::size_t SettingSchedule::index_at(double t) const {
    if (t < start_) throw UndefinedTimeError(t, start_);
    const auto it = std::upper_bound(time_.begin(), time_.end(), t);
    if (it == time_.begin()) return initial_;
    return label_[static_cast<std::size_t>(it - time_.begin()) - 1];
}

std::size_t SettingSchedule::index_without_late_interventions(double t, double cutoff) const {
    if (t < start_) throw UndefinedTimeError(t, start_);
    auto i = static_cast<std::size_t>(std::upper_bound(time_.begin(), time_.end(), t) -
                                      time_.begin());
    while (i > 0) {
        --i;
        if (decision_[i] <= cutoff) return label_[i];
    }
    return initial_;
}

const SettingLabel& SettingSchedule::value_at(double t) const {
    return palette_[index_at(t)];
}

const SettingLabel& SettingSchedule::value_without_late_interventions(double t,
                                                                      double cutoff) const {
    return palette_[index_without_late_interventions(t, cutoff)];
}

std::vector<Intervention> SettingSchedule::interventions() const {
    std::vector<Intervention> out;
    out.reserve(intervention_count_);
    for (std::size_t i = 0; i < time_.size(); ++i) {
        if (decision_[i] == kNoDecision) continue;
        out.push_back(Intervention{station_, decision_[i], time_[i] - decision_[i],
                                   palette_[label_[i]], tags_[tag_[i]]});
    }
    return out;
}

// --- ScheduleBuilder -------------------------------------------------------

ScheduleBuilder::ScheduleBuilder(int station, double start, const SettingLabel& initial) {
    if (station != 1 && station != 2) throw InvalidArgumentError("station must be 1 or 2");
    schedule_.station_ = station;
    schedule_.start_ = start;
    schedule_.initial_ = intern_label(initial);
    schedule_.tags_.emplace_back();
}

std::uint16_t ScheduleBuilder::intern_label(const SettingLabel& label) {
    const auto i = schedule_.palette_.intern(label);
    if (i > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidArgumentError("too many distinct setting labels");
    }
    return static_cast<std::uint16_t>(i);
}

std::uint16_t ScheduleBuilder::intern_tag(std::string_view tag) {
    auto& tags = schedule_.tags_;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] == tag) return static_cast<std::uint16_t>(i);
    }
    if (tags.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidArgumentError("too many distinct source tags");
    }
    tags.emplace_back(tag);
    return static_cast<std::uint16_t>(tags.size() - 1);
}

void ScheduleBuilder::reserve(std::size_t events) {
    schedule_.time_.reserve(events);
    schedule_.decision_.reserve(events);
    schedule_.label_.reserve(events);
    schedule_.tag_.reserve(events);
}

ScheduleBuilder& ScheduleBuilder::switch_to(double time, const SettingLabel& label) {
    if (!std::isfinite(time) || time < schedule_.start_) {
        throw InvalidArgumentError("base switch before timeline start");
    }
    if (has_base_ && !(time > last_base_)) {
        throw InvalidArgumentError("base switch times must be strictly increasing");
    }
    has_base_ = true;
    last_base_ = time;
    schedule_.time_.push_back(time);
    schedule_.decision_.push_back(kNoDecision);
    schedule_.label_.push_back(intern_label(label));
    schedule_.tag_.push_back(0);
    return *this;
}

ScheduleBuilder& ScheduleBuilder::intervene(const Intervention& intervention) {
    if (intervention.station != schedule_.station_) {
        throw InvalidArgumentError("intervention targets the other station");
    }
    return intervene(intervention.decision_time, intervention.delay, intervention.new_label,
                     intervention.source_tag);
}

ScheduleBuilder& ScheduleBuilder::intervene(double decision_time, double delay,
                                            const SettingLabel& label,
                                            std::string_view source_tag) {
    if (!std::isfinite(decision_time) || !std::isfinite(delay)) {
        throw InvalidArgumentError("intervention times must be finite");
    }
    if (delay < 0.0) throw InvalidArgumentError("intervention delay must be >= 0");
    schedule_.time_.push_back(decision_time + delay);
    schedule_.decision_.push_back(decision_time);
    schedule_.label_.push_back(intern_label(label));
    schedule_.tag_.push_back(intern_tag(source_tag));
    ++schedule_.intervention_count_;
    return *this;
}

SettingSchedule ScheduleBuilder::build() {
    auto& s = schedule_;
    const std::size_t n = s.time_.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t l, std::uint32_t r) {
        if (s.time_[l] != s.time_[r]) return s.time_[l] < s.time_[r];
        const bool li = s.decision_[l] != kNoDecision;
        const bool ri = s.decision_[r] != kNoDecision;
        return !li && ri;
    });
    if (!std::is_sorted(order.begin(), order.end())) {
        auto permute = [&order](auto& v) {
            std::remove_reference_t<decltype(v)> sorted;
            sorted.reserve(v.size());
            for (auto i : order) sorted.push_back(v[i]);
            v = std::move(sorted);
        };
        permute(s.time_);
        permute(s.decision_);
        permute(s.label_);
        permute(s.tag_);
    }
    return std::move(s);
}

// --- retarded settings -----------------------------------------------------

const SettingLabel& simple_retarded(const SettingSchedule& schedule, double t_meas,
                                    const Geometry& geom) {
    return schedule.value_at(t_meas - geom.light_delay());
}

const SettingLabel& predictive_retarded(const SettingSchedule& schedule, double t_target,
                                        double t_observer_meas, const Geometry& geom) {
    const double cutoff = t_observer_meas - geom.light_delay();
    if (cutoff < schedule.start()) throw UndefinedTimeError(cutoff, schedule.start());
    if (t_target < cutoff) {
        throw InvalidArgumentError("predictive target time precedes the light-cone cutoff");
    }
    return schedule.value_without_late_interventions(t_target, cutoff);
}

std::string_view to_string(EqualityClass cls) noexcept {
    switch (cls) {
        case EqualityClass::BothEqual: return "both-equal";
        case EqualityClass::Only1Equal: return "only-1-equal";
        case EqualityClass::Only2Equal: return "only-2-equal";
        case EqualityClass::NeitherEqual: return "neither-equal";
    }
    return "unknown";
}

EqualityClass classify_trial(const SettingLabel& a, const SettingLabel& a_r,
                             const SettingLabel& b, const SettingLabel& b_r) noexcept {
    const bool first = a.id == a_r.id;
    const bool second = b.id == b_r.id;
    if (first && second) return EqualityClass::BothEqual;
    if (first) return EqualityClass::Only1Equal;
    if (second) return EqualityClass::Only2Equal;
    return EqualityClass::NeitherEqual;
}

// --- intervention streams --------------------------------------------------

std::vector<Intervention> read_interventions_csv(std::istream& in, const Palette& station1,
                                                 const Palette& station2) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("intervention stream is empty");
    const auto header = text::split(text::trim(line), ',');
    static constexpr std::string_view kColumns[] = {"station", "decision_time", "delay",
                                                    "label", "source_tag"};
    if (header.size() != 5 ||
        !std::equal(header.begin(), header.end(), std::begin(kColumns),
                    [](std::string_view l, std::string_view r) { return text::trim(l) == r; })) {
        throw ConfigError("intervention stream header must be "
                          "station,decision_time,delay,label,source_tag");
    }

    std::vector<Intervention> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        const std::string where = "intervention row " + std::to_string(row);
        std::string_view rest = line;
        std::string_view fields[4];
        for (auto& f : fields) {
            const auto comma = rest.find(',');
            if (comma == std::string_view::npos) throw ConfigError(where + ": too few columns");
            f = text::trim(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }
        try {
            Intervention iv;
            iv.station = static_cast<int>(text::to_int(fields[0], "station"));
            if (iv.station != 1 && iv.station != 2) throw ConfigError("station must be 1 or 2");
            iv.decision_time = text::to_double(fields[1], "decision_time");
            iv.delay = text::to_double(fields[2], "delay");
            if (iv.delay < 0.0) throw ConfigError("delay must be >= 0");
            iv.new_label = (iv.station == 1 ? station1 : station2).at(fields[3]);
            iv.source_tag = std::string(text::trim(rest));
            out.push_back(std::move(iv));
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<Intervention> load_interventions_csv(const std::string& path,
                                                 const Palette& station1,
                                                 const Palette& station2) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open intervention stream '" + path + "'");
    return read_interventions_csv(in, station1, station2);
}

void write_interventions_csv(std::ostream& out, const std::vector<Intervention>& interventions) {
    out << "station,decision_time,delay,label,source_tag\n";
    for (const auto& iv : interventions) {
        out << iv.station << ',' << text::exact(iv.decision_time) << ','
            << text::exact(iv.delay) << ',' << iv.new_label.id << ',' << iv.source_tag << '\n';
    }
}

}  // namespace rbl
