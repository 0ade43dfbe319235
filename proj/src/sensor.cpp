#include "evspec/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evspec {

void SensorConfig::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("sensor resolution must be positive");
    if (c_on <= 0 || c_off <= 0) throw std::invalid_argument("contrast thresholds must be > 0");
    if (f_dark <= 0) throw std::invalid_argument("f_dark must be > 0");
    if (kappa < 0) throw std::invalid_argument("kappa must be >= 0");
    if (epsilon <= 0) throw std::invalid_argument("epsilon must be > 0");
    if (pr_bias <= 0) throw std::invalid_argument("pr_bias must be > 0");
    if (c_on_eff_nominal() <= 0) throw std::invalid_argument("diff_on_bias cancels c_on");
    if (refractory_us < 0) throw std::invalid_argument("refractory must be >= 0");
    if (threshold_sigma < 0) throw std::invalid_argument("threshold_sigma must be >= 0");
}

SensorConfig ideal_sensor(int width, int height) {
    SensorConfig cfg;
    cfg.width = width;
    cfg.height = height;
    cfg.kappa = 0.0;
    cfg.f_dark = 1e9;
    cfg.epsilon = 1e-12;
    return cfg;
}

double log_photocurrent(double intensity, double epsilon) {
    if (intensity < 0) throw std::invalid_argument("negative intensity");
    return std::log(intensity + epsilon);
}

double bandwidth_of(double intensity, const SensorConfig& cfg) {
    return cfg.pr_bias * (cfg.f_dark + cfg.kappa * intensity);
}

double follower_step(double v, double l_target, double dt_s, double f_c) {
    if (dt_s < 0) throw std::invalid_argument("dt must be >= 0");
    return v + (1.0 - std::exp(-2.0 * M_PI * f_c * dt_s)) * (l_target - v);
}

void pixel_update(PixelState& state, double v, std::int64_t t_us, std::int64_t refractory_us,
                  std::uint16_t x, std::uint16_t y, std::vector<Event>& out) {
    state.v = v;
    while (state.v - state.v_ref >= state.c_on_eff) {
        state.v_ref += state.c_on_eff;
        if (t_us - state.t_last_event_us >= refractory_us) {
            out.push_back({t_us, x, y, +1});
            state.t_last_event_us = t_us;
        }
    }
    while (state.v_ref - state.v >= state.c_off_eff) {
        state.v_ref -= state.c_off_eff;
        if (t_us - state.t_last_event_us >= refractory_us) {
            out.push_back({t_us, x, y, -1});
            state.t_last_event_us = t_us;
        }
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t u) { return double(u >> 11) * 0x1.0p-53; }

// Order-independent per-pixel standard normal (Box-Muller on hashed seed).
double pixel_normal(std::uint64_t seed, std::uint64_t pixel_index) {
    const std::uint64_t a = splitmix64(seed ^ (pixel_index * 2 + 1));
    const std::uint64_t b = splitmix64(seed ^ (pixel_index * 2 + 2));
    const double u1 = std::max(uniform01(a), 1e-300);
    const double u2 = uniform01(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::int64_t to_us(double t_s) { return std::llrint(t_s * 1e6); }

}  // namespace

void simulate_pixel(PixelState& state, std::uint16_t x, std::uint16_t y, double reflectance,
                    double init_irradiance, const std::vector<IlluminationSegment>& segments,
                    const SensorConfig& cfg, std::vector<Event>& out, std::uint64_t& updates) {
    // Pixel starts settled on the pre-projection illumination.
    state.v = state.v_ref = log_photocurrent(init_irradiance * reflectance, cfg.epsilon);
    for (const IlluminationSegment& seg : segments) {
        const double intensity = seg.irradiance * reflectance;
        const double l = log_photocurrent(intensity, cfg.epsilon);
        const double f_c = bandwidth_of(intensity, cfg);
        ++updates;
        const double v0 = state.v;
        const double dt = seg.t1_s - seg.t0_s;
        if (f_c > 0 && l != v0) {
            const double rate = 2.0 * M_PI * f_c;
            if (l > v0) {
                while (true) {
                    const double vth = state.v_ref + state.c_on_eff;
                    if (vth > l) break;
                    const double tc =
                        std::max(seg.t0_s, seg.t0_s + std::log((l - v0) / (l - vth)) / rate);
                    if (!(tc <= seg.t1_s)) break;
                    state.v_ref = vth;
                    const std::int64_t t_us = to_us(tc);
                    if (t_us - state.t_last_event_us >= cfg.refractory_us) {
                        out.push_back({t_us, x, y, +1});
                        state.t_last_event_us = t_us;
                    }
                }
            } else {
                while (true) {
                    const double vth = state.v_ref - state.c_off_eff;
                    if (vth < l) break;
                    const double tc =
                        std::max(seg.t0_s, seg.t0_s + std::log((v0 - l) / (vth - l)) / rate);
                    if (!(tc <= seg.t1_s)) break;
                    state.v_ref = vth;
                    const std::int64_t t_us = to_us(tc);
                    if (t_us - state.t_last_event_us >= cfg.refractory_us) {
                        out.push_back({t_us, x, y, -1});
                        state.t_last_event_us = t_us;
                    }
                }
            }
        }
        state.v = follower_step(v0, l, dt, f_c);
    }
}

namespace {

// Chopper half-period boundaries over [0, duration); phase 0 is "on".
std::vector<IlluminationSegment> chopped_segments(double ambient, double band_intensity,
                                                  double chopper_rate_hz, double duration_s) {
    std::vector<IlluminationSegment> segs;
    const double half = 0.5 / chopper_rate_hz;
    int k = 0;
    for (double t = 0.0; t < duration_s; t = ++k * half) {
        const double t1 = std::min(duration_s, (k + 1) * half);
        segs.push_back({t, t1, ambient + (k % 2 == 0 ? band_intensity : 0.0)});
    }
    return segs;
}

// Quiet/pulse/quiet per frame for one camera pixel's projector pixel.
std::vector<IlluminationSegment> scanning_segments(const ScanSchedule& sched, double ambient,
                                                   double band_intensity, std::int32_t proj_index,
                                                   double duration_s) {
    std::vector<IlluminationSegment> segs;
    if (proj_index < 0) {
        segs.push_back({0.0, duration_s, ambient});
        return segs;
    }
    const int row = proj_index / sched.width, col = proj_index % sched.width;
    double cursor = 0.0;
    for (long frame = 0;; ++frame) {
        const double tp = sched.time_of_pixel(col, row, frame);
        if (tp >= duration_s) break;
        if (tp > cursor) segs.push_back({cursor, tp, ambient});
        const double t1 = std::min(duration_s, tp + sched.dwell_s);
        segs.push_back({tp, t1, ambient + band_intensity});
        cursor = t1;
    }
    if (cursor < duration_s) segs.push_back({cursor, duration_s, ambient});
    return segs;
}

}  // namespace

int max_threads() {
    if (const char* env = std::getenv("EVENT_SPECTRA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return int(std::thread::hardware_concurrency());
#endif
}

SimOutput simulate(const SceneModel& scene, const RigGeometry& rig, const ProjectorConfig& proj,
                   const SensorConfig& cfg, double duration_s, double wavelength_nm,
                   ExecutionPolicy policy) {
    cfg.validate();
    proj.validate();
    if (duration_s <= 0) throw std::invalid_argument("duration must be > 0");
    if (!proj.has_wavelength(wavelength_nm))
        throw std::invalid_argument("wavelength not configured on projector");
    if (scene.depth_gt.width() != cfg.width || scene.depth_gt.height() != cfg.height)
        throw std::invalid_argument("scene and sensor resolutions differ");

    const ImageFloat reflectance = reflectance_image(scene, wavelength_nm);

    const bool scanning = proj.mode == ProjectorMode::scanning;
    CorrespondenceMap corr;
    ScanSchedule sched;
    std::vector<IlluminationSegment> shared_segs;
    if (scanning) {
        corr = build_correspondence(scene, rig, proj);
        sched = ScanSchedule::from_config(proj);
    } else {
        shared_segs = chopped_segments(scene.ambient_intensity, proj.band_intensity,
                                       proj.chopper_rate_hz, duration_s);
    }

    SimOutput out;
    out.stream.geometry = {cfg.width, cfg.height};
    out.event_counts = Image<std::uint32_t>(cfg.width, cfg.height, 0);

    auto run_row = [&](int y, std::vector<Event>& events, std::uint64_t& updates) {
        std::vector<IlluminationSegment> local;
        for (int x = 0; x < cfg.width; ++x) {
            const std::size_t idx = std::size_t(y) * cfg.width + x;
            PixelState state;
            state.c_on_eff = cfg.c_on_eff_nominal();
            state.c_off_eff = cfg.c_off;
            if (cfg.threshold_sigma > 0) {
                state.c_on_eff =
                    std::max(1e-6, state.c_on_eff +
                                       cfg.threshold_sigma * pixel_normal(cfg.noise_seed, idx * 2));
                state.c_off_eff =
                    std::max(1e-6, state.c_off_eff +
                                       cfg.threshold_sigma * pixel_normal(cfg.noise_seed, idx * 2 + 1));
            }
            const std::vector<IlluminationSegment>* segs = &shared_segs;
            if (scanning) {
                local = scanning_segments(sched, scene.ambient_intensity, proj.band_intensity,
                                          corr.at(x, y), duration_s);
                segs = &local;
            }
            const std::size_t before = events.size();
            simulate_pixel(state, std::uint16_t(x), std::uint16_t(y), reflectance.data[idx],
                           scene.ambient_intensity, *segs, cfg, events, updates);
            out.event_counts.data[idx] = std::uint32_t(events.size() - before);
        }
    };

    if (policy == ExecutionPolicy::serial) {
        std::vector<Event> events;
        for (int y = 0; y < cfg.height; ++y) run_row(y, events, out.pixel_updates);
        out.stream.events = std::move(events);
    } else {
#ifdef _OPENMP
        const int nthreads = max_threads();
        std::vector<std::vector<Event>> buckets(cfg.height);
        std::uint64_t updates = 0;
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads) reduction(+ : updates)
        for (int y = 0; y < cfg.height; ++y) run_row(y, buckets[y], updates);
        out.pixel_updates = updates;
        std::size_t total = 0;
        for (const auto& b : buckets) total += b.size();
        out.stream.events.reserve(total);
        for (auto& b : buckets) {
            out.stream.events.insert(out.stream.events.end(), b.begin(), b.end());
            b.clear();
        }
#else
        std::vector<Event> events;
        for (int y = 0; y < cfg.height; ++y) run_row(y, events, out.pixel_updates);
        out.stream.events = std::move(events);
#endif
    }

    std::sort(out.stream.events.begin(), out.stream.events.end(), event_order);
    return out;
}

double chopped_response_amplitude(double reflectance, double ambient, double band_intensity,
                                  double chopper_rate_hz, const SensorConfig& cfg) {
    const double i_off = ambient * reflectance;
    const double i_on = (ambient + band_intensity) * reflectance;
    const double dl = std::log(i_on + cfg.epsilon) - std::log(i_off + cfg.epsilon);
    const double half = 0.5 / chopper_rate_hz;
    const double a = std::exp(-2.0 * M_PI * bandwidth_of(i_on, cfg) * half);
    const double b = std::exp(-2.0 * M_PI * bandwidth_of(i_off, cfg) * half);
    // Peak of the settled oscillation relative to the initial (dark-phase) level.
    return dl * (1.0 - a) / (1.0 - a * b);
}

}  // namespace evspec
