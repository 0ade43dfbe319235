#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "evspec/projector.hpp"
#include "evspec/scene.hpp"
#include "evspec/types.hpp"

namespace evspec {

struct SensorConfig {
    int width = 640;
    int height = 480;
    double c_on = 0.3;               // ON contrast threshold (log-intensity)
    double c_off = 0.3;              // OFF contrast threshold
    double pr_bias = 1.0;            // multiplicative bandwidth factor (PR Bias)
    double diff_on_bias = 0.0;       // additive shift of c_on (DIFF_ON)
    double f_dark = 50.0;            // Hz, bandwidth floor in the dark
    double kappa = 1e4;              // Hz per radiometric unit
    std::int64_t refractory_us = 0;
    double epsilon = 1e-9;           // dark-current intensity floor
    double threshold_sigma = 0.0;    // per-pixel Gaussian mismatch on thresholds
    std::uint64_t noise_seed = 0;

    void validate() const;
    double c_on_eff_nominal() const { return c_on + diff_on_bias; }
};

// Ideal-sensor knobs: flat, effectively infinite bandwidth.
SensorConfig ideal_sensor(int width = 640, int height = 480);

struct PixelState {
    double v = 0.0;       // source-follower output, log-intensity units
    double v_ref = 0.0;   // level at last event/reset
    std::int64_t t_last_event_us = std::numeric_limits<std::int64_t>::min() / 2;
    double c_on_eff = 0.3;
    double c_off_eff = 0.3;
};

struct SimOutput {
    EventStream stream;
    Image<std::uint32_t> event_counts;   // per-pixel diagnostic
    std::uint64_t pixel_updates = 0;     // per-pixel segment advances performed
};

double log_photocurrent(double intensity, double epsilon);

// f_c = pr_bias * (f_dark + kappa * I).
double bandwidth_of(double intensity, const SensorConfig& cfg);

// Exact discretization of the first-order low pass over one step.
double follower_step(double v, double l_target, double dt_s, double f_c);

// Discrete threshold check at time t; appends events for every full
// threshold multiple between v and v_ref. Refractory-suppressed events
// still advance v_ref.
void pixel_update(PixelState& state, double v, std::int64_t t_us, std::int64_t refractory_us,
                  std::uint16_t x, std::uint16_t y, std::vector<Event>& out);

// Piecewise-constant illumination segment seen by one pixel.
struct IlluminationSegment {
    double t0_s, t1_s;
    double irradiance;  // pre-reflectance
};

// Continuous-time kernel: advances one pixel across its segments, emitting
// events at analytic threshold-crossing times. Serial reference for the
// simulator; also used directly by unit tests.
void simulate_pixel(PixelState& state, std::uint16_t x, std::uint16_t y, double reflectance,
                    double init_irradiance, const std::vector<IlluminationSegment>& segments,
                    const SensorConfig& cfg, std::vector<Event>& out, std::uint64_t& updates);

SimOutput simulate(const SceneModel& scene, const RigGeometry& rig, const ProjectorConfig& proj,
                   const SensorConfig& cfg, double duration_s, double wavelength_nm,
                   ExecutionPolicy policy = ExecutionPolicy::openmp);

// Steady-state peak excursion of V above the initial reference for a pixel
// of reflectance T under chopped illumination; analytic oracle used by the
// sweep design and tests.
double chopped_response_amplitude(double reflectance, double ambient, double band_intensity,
                                  double chopper_rate_hz, const SensorConfig& cfg);

// Max worker threads: EVENT_SPECTRA_THREADS when set, else hardware default.
int max_threads();

}  // namespace evspec
