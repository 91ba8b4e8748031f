#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbl {

// Two-station lab frame. Station 1 measures at t1, station 2 at t2; t0 is the
// time the hidden variables are fixed and must precede both retarded times.
struct Geometry {
    double separation = 1.0;    // L
    double signal_speed = 1.0;  // c
    double t1 = 2.0;
    double t2 = 2.0;
    double t0 = 0.0;

    double light_delay() const noexcept { return separation / signal_speed; }

    // Throws InvalidArgumentError when L <= 0, c <= 0 or t0 is not before both
    // t1 - L/c and t2 - L/c.
    void validate() const;
};

// A measurement setting. Identity is by id; the angle is reduced to [0, 2π).
struct SettingLabel {
    std::string id;
    double angle = 0.0;

    SettingLabel() = default;
    SettingLabel(std::string label_id, double radians);

    friend bool operator==(const SettingLabel& lhs, const SettingLabel& rhs) noexcept {
        return lhs.id == rhs.id;
    }
};

// Interned set of labels; rejects a second label with an existing id but a
// different angle (tolerance 1e-12).
class Palette {
public:
    Palette() = default;
    explicit Palette(std::vector<SettingLabel> labels);

    std::size_t intern(const SettingLabel& label);
    std::optional<std::size_t> find(std::string_view id) const;
    const SettingLabel& at(std::string_view id) const;

    const SettingLabel& operator[](std::size_t index) const { return labels_[index]; }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<SettingLabel>& labels() const noexcept { return labels_; }

private:
    std::vector<SettingLabel> labels_;
};

struct Intervention {
    int station = 1;
    double decision_time = 0.0;
    double delay = 0.0;
    SettingLabel new_label;
    std::string source_tag;

    double effect_time() const noexcept { return decision_time + delay; }
};

class ScheduleBuilder;

// Piecewise-constant, right-continuous setting timeline for one station: a
// deterministic base timeline overridden by interventions from their effect
// time until the next base switch or intervention effect. At a shared instant
// an intervention beats a base switch.
class SettingSchedule {
public:
    int station() const noexcept { return station_; }
    double start() const noexcept { return start_; }
    const Palette& palette() const noexcept { return palette_; }

    const SettingLabel& value_at(double t) const;

    // Value at t of the counterfactual timeline that drops every intervention
    // decided after `cutoff`.
    const SettingLabel& value_without_late_interventions(double t, double cutoff) const;

    // Palette indices of the two lookups above.
    std::size_t index_at(double t) const;
    std::size_t index_without_late_interventions(double t, double cutoff) const;

    std::size_t intervention_count() const noexcept { return intervention_count_; }
    std::size_t base_switch_count() const noexcept { return time_.size() - intervention_count_; }
    std::vector<Intervention> interventions() const;

private:
    friend class ScheduleBuilder;

    int station_ = 1;
    double start_ = 0.0;
    Palette palette_;
    std::vector<std::string> tags_;
    std::uint16_t initial_ = 0;

    // Merged events, sorted by (time, base before intervention, insertion order).
    // decision_ is -inf for base switches.
    std::vector<double> time_;
    std::vector<double> decision_;
    std::vector<std::uint16_t> label_;
    std::vector<std::uint16_t> tag_;
    std::size_t intervention_count_ = 0;
};

class ScheduleBuilder {
public:
    ScheduleBuilder(int station, double start, const SettingLabel& initial);

    // Base switches must be at or after the start and strictly increasing.
    ScheduleBuilder& switch_to(double time, const SettingLabel& label);
    ScheduleBuilder& intervene(const Intervention& intervention);
    ScheduleBuilder& intervene(double decision_time, double delay, const SettingLabel& label,
                               std::string_view source_tag);
    void reserve(std::size_t events);

    // Hands the schedule over; the builder is left empty.
    SettingSchedule build();

private:
    std::uint16_t intern_label(const SettingLabel& label);
    std::uint16_t intern_tag(std::string_view tag);

    SettingSchedule schedule_;
    double last_base_ = 0.0;
    bool has_base_ = false;
};

// a_r = a(t_meas - L/c), with `schedule` the far station's timeline.
const SettingLabel& simple_retarded(const SettingSchedule& schedule, double t_meas,
                                    const Geometry& geom);

// The far setting at t_target as predicted from the near station's past light
// cone: interventions decided after t_observer_meas - L/c are ignored.
const SettingLabel& predictive_retarded(const SettingSchedule& schedule, double t_target,
                                        double t_observer_meas, const Geometry& geom);

enum class EqualityClass { BothEqual, Only1Equal, Only2Equal, NeitherEqual };

std::string_view to_string(EqualityClass cls) noexcept;

EqualityClass classify_trial(const SettingLabel& a, const SettingLabel& a_r,
                             const SettingLabel& b, const SettingLabel& b_r) noexcept;

// CSV with header station,decision_time,delay,label,source_tag. Labels are
// resolved against the palette of the row's station; source_tag is the rest
// of the line and may contain commas.
std::vector<Intervention> read_interventions_csv(std::istream& in, const Palette& station1,
                                                 const Palette& station2);
std::vector<Intervention> load_interventions_csv(const std::string& path,
                                                 const Palette& station1,
                                                 const Palette& station2);
void write_interventions_csv(std::ostream& out, const std::vector<Intervention>& interventions);

}  // namespace rbl
