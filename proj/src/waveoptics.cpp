// SPDX-License-Identifier: Apache-2.0
//
// lensmimo: link-level simulator for RF lens-embedded massive MIMO downlinks
// Copyright (C) 2026 The lensmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "lensmimo/waveoptics.hpp"
#include "lensmimo/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lensmimo::waveoptics
{
    namespace
    {
        constexpr double relative_tolerance = 1e-9;

        std::string describe(double v)
        {
            std::ostringstream os;
            os << v;
            return os.str();
        }
    }

    std::string to_string(FresnelKernel kernel)
    {
        return kernel == FresnelKernel::transfer_function ? "transfer_function" : "sampled_impulse";
    }

    FresnelKernel fresnel_kernel_from_string(const std::string &name)
    {
        if (name == "transfer_function" || name == "transfer")
            return FresnelKernel::transfer_function;
        if (name == "sampled_impulse" || name == "impulse")
            return FresnelKernel::sampled_impulse;
        throw ConfigError("Unknown Fresnel kernel '" + name + "' (expected transfer_function or sampled_impulse).");
    }

    // ---------------------------------------------------------------------------------------------

    PropagationGrid PropagationGrid::make(double dx, double dz, double window, double wavelength, FresnelKernel kernel)
    {
        if (!(dx > 0.0) || !(dz > 0.0) || !(wavelength > 0.0) || !(window > 0.0))
            throw ConfigError("Grid requires dx > 0, dz > 0, window > 0 and wavelength > 0.");

        const double ratio = window / dx;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > relative_tolerance * std::max(1.0, ratio))
            throw ConfigError("Window " + describe(window) + " is not an integer multiple of dx = " + describe(dx) + ".");

        const auto ns = static_cast<std::size_t>(rounded);
        if (ns < 2 || ns % 2 != 0)
            throw ConfigError("Sample count W/dx = " + std::to_string(ns) + " must be even and at least 2.");

        PropagationGrid g;
        g.wavelength = wavelength;
        g.dx = dx;
        g.dz = dz;
        g.window = window;
        g.ns = ns;
        g.kernel = kernel;
        return g;
    }

    double PropagationGrid::kappa() const { return 2.0 * pi / wavelength; }

    double PropagationGrid::x(std::size_t index) const
    {
        return (static_cast<double>(index) - static_cast<double>(ns / 2)) * dx;
    }

    std::size_t PropagationGrid::samples_within(double half_width) const
    {
        std::size_t count = 0;
        for (std::size_t i = 0; i < ns; ++i)
            if (std::abs(x(i)) <= half_width * (1.0 + relative_tolerance))
                ++count;
        return count;
    }

    // ---------------------------------------------------------------------------------------------

    LensSpec LensSpec::make(double focal_length, double aperture, double permittivity)
    {
        if (!(focal_length > 0.0))
            throw ConfigError("Lens focal length must be positive.");
        if (!(aperture > 0.0))
            throw ConfigError("Lens aperture must be positive.");
        if (!(permittivity > 1.0))
            throw ConfigError("Lens permittivity must exceed 1 (refractive index n > 1).");

        LensSpec l;
        l.focal_length = focal_length;
        l.aperture = aperture;
        l.permittivity = permittivity;
        return l;
    }

    LensSpec LensSpec::from_radii(double radius_1, double radius_2, double aperture, double permittivity)
    {
        if (!(permittivity > 1.0))
            throw ConfigError("Lens permittivity must exceed 1 (refractive index n > 1).");
        const double n = std::sqrt(permittivity);
        const double curvature = 1.0 / radius_1 - 1.0 / radius_2;
        if (!std::isfinite(curvature) || curvature <= 0.0)
            throw ConfigError("Surface radii must describe a converging lens (1/R1 - 1/R2 > 0).");

        LensSpec l = make(1.0 / ((n - 1.0) * curvature), aperture, permittivity);
        l.radius_1 = radius_1;
        l.radius_2 = radius_2;
        return l;
    }

    double LensSpec::refractive_index() const { return std::sqrt(permittivity); }
    double LensSpec::thickness() const { return lens_thickness(focal_length, aperture, refractive_index()); }

    double LensSpec::contour_a() const
    {
        const double n = refractive_index();
        return n * n - 1.0;
    }

    double LensSpec::contour_b() const
    {
        const double n = refractive_index();
        return n * focal_length / (n + 1.0);
    }

    double LensSpec::contour_c() const
    {
        const double n = refractive_index();
        return (n - 1.0) * focal_length * focal_length / (n + 1.0);
    }

    // ---------------------------------------------------------------------------------------------

    double lens_thickness(double focal_length, double aperture, double refractive_index)
    {
        const double n = refractive_index;
        if (!(n > 1.0) || !(focal_length > 0.0) || !(aperture >= 0.0))
            throw DomainError("Lens thickness requires n > 1, f > 0 and D >= 0.");

        // (sqrt(f^2 + s) - f) / (n + 1) rewritten as s / ((n + 1)(sqrt(f^2 + s) + f)) to avoid
        // cancellation when D << f
        const double f = focal_length;
        const double s = (n + 1.0) * aperture * aperture / (4.0 * (n - 1.0));
        const double t = s / ((n + 1.0) * (std::sqrt(f * f + s) + f));
        if (!std::isfinite(t))
            throw DomainError("Lens thickness is not finite.");
        return t;
    }

    namespace
    {
        double checked_sqrt(double radicand, double scale, double x1)
        {
            // Round-off near the vertex may leave a tiny negative radicand
            if (radicand < 0.0 && radicand > -1e-12 * std::max(1.0, scale))
                radicand = 0.0;
            if (radicand < 0.0 || !std::isfinite(radicand))
                throw DomainError("Axial coordinate x1 = " + describe(x1) + " lies outside the lens contour domain.");
            return std::sqrt(radicand);
        }
    }

    double hyperbolic_contour(const LensSpec &lens, double x1)
    {
        const double n = lens.refractive_index();
        const double f = lens.focal_length;
        const double u = x1 - f;
        const double radicand = (n * n - 1.0) * u * u + 2.0 * (n - 1.0) * u * f;
        return checked_sqrt(radicand, (n * n - 1.0) * u * u + std::abs(2.0 * (n - 1.0) * u * f), x1);
    }

    double hyperbolic_contour_abc(const LensSpec &lens, double x1)
    {
        const double a = lens.contour_a();
        const double b = lens.contour_b();
        const double c = lens.contour_c();
        const double radicand = a * (x1 - b) * (x1 - b) - c;
        return checked_sqrt(radicand, a * (x1 - b) * (x1 - b) + c, x1);
    }

    // ---------------------------------------------------------------------------------------------

    ComplexField lens_phase_profile(const LensSpec &lens, const PropagationGrid &grid, double aod_rad)
    {
        if (!(std::abs(aod_rad) < pi / 2.0))
            throw DomainError("Angle of departure must satisfy |aod| < 90 degrees.");

        const double half = lens.aperture / 2.0;
        const std::size_t inside = grid.samples_within(half);
        if (lens.aperture > grid.window || 2 * inside > grid.ns)
            throw ConfigError("Lens aperture " + describe(lens.aperture) + " needs a window of at least twice its width (window = " +
                              describe(grid.window) + ").");
        if (inside == 0)
            throw ResolutionError("No grid sample falls inside the lens aperture.");

        const double kappa = grid.kappa();
        const double f = lens.focal_length;
        const double tilt = std::sin(aod_rad);

        ComplexField u;
        u.grid = grid;
        u.samples = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.ns));
        for (std::size_t i = 0; i < grid.ns; ++i)
        {
            const double x = grid.x(i);
            if (std::abs(x) > half * (1.0 + relative_tolerance))
                continue;
            const double phase = -kappa * x * x / (2.0 * f) - kappa * x * tilt;
            u.samples[static_cast<Eigen::Index>(i)] = std::polar(1.0, phase);
        }
        u.samples /= std::sqrt(u.samples.squaredNorm());
        u.power_target = 1.0;
        return u;
    }

    // ---------------------------------------------------------------------------------------------

    struct BeamPropagator::Plans
    {
        explicit Plans(std::size_t n) : fft(n) {}
        detail::FftPlan fft;
    };

    BeamPropagator::BeamPropagator(const PropagationGrid &grid, double step_length)
        : grid_(grid), step_length_(step_length)
    {
        if (!(step_length > 0.0))
            throw ConfigError("Propagation step must be positive.");

        const auto n = static_cast<Eigen::Index>(grid.ns);
        const double lambda = grid.wavelength;
        const double kappa = grid.kappa();
        const cdouble carrier = std::polar(1.0, kappa * step_length);
        plans_ = std::make_unique<Plans>(grid.ns);
        kernel_.resize(n);

        if (grid.kernel == FresnelKernel::transfer_function)
        {
            const double df = 1.0 / (static_cast<double>(n) * grid.dx);
            for (Eigen::Index k = 0; k < n; ++k)
            {
                const double fx = static_cast<double>(k < n / 2 ? k : k - n) * df;
                kernel_[k] = carrier * std::polar(1.0, -pi * lambda * step_length * fx * fx);
            }
        }
        else
        {
            for (Eigen::Index k = 0; k < n; ++k)
            {
                const double x = static_cast<double>(k < n / 2 ? k : k - n) * grid.dx;
                kernel_[k] = std::polar(1.0, kappa * x * x / (2.0 * step_length));
            }
            plans_->fft.forward(kernel_.data());
            kernel_ *= carrier * grid.dx / (cdouble(0.0, 1.0) * lambda * step_length);
        }
    }

    BeamPropagator::~BeamPropagator() = default;
    BeamPropagator::BeamPropagator(BeamPropagator &&) noexcept = default;
    BeamPropagator &BeamPropagator::operator=(BeamPropagator &&) noexcept = default;

    ComplexField BeamPropagator::step(const ComplexField &u, double *relative_drift) const
    {
        if (static_cast<std::size_t>(u.samples.size()) != grid_.ns)
            throw ConfigError("Field length does not match the propagator grid.");

        const double before = u.samples.squaredNorm();
        ComplexField out;
        out.grid = u.grid;
        out.power_target = u.power_target;
        out.z_position = u.z_position + step_length_;
        out.samples = u.samples;

        plans_->fft.forward(out.samples.data());
        out.samples.array() *= kernel_.array();
        plans_->fft.inverse(out.samples.data());
        out.samples /= static_cast<double>(grid_.ns);

        const double after = out.samples.squaredNorm();
        if (!(after > 0.0) || !std::isfinite(after))
            throw DegenerateError("Field vanished during propagation.");
        if (relative_drift != nullptr)
            *relative_drift = before > 0.0 ? std::abs(after - before) / before : 0.0;

        out.samples *= std::sqrt(u.power_target / after);
        return out;
    }

    ComplexField bpm_step(const ComplexField &u)
    {
        return BeamPropagator(u.grid, u.grid.dz).step(u);
    }

    FieldHistory propagate(const ComplexField &u0, std::size_t steps)
    {
        return propagate(u0, steps, u0.grid.dz);
    }

    FieldHistory propagate(const ComplexField &u0, std::size_t steps, double step_length)
    {
        FieldHistory h;
        h.grid = u0.grid;
        h.step = step_length;
        h.columns.resize(u0.samples.size(), static_cast<Eigen::Index>(steps + 1));
        h.columns.col(0) = u0.samples;
        h.relative_drift.reserve(steps);

        const BeamPropagator propagator(u0.grid, step_length);
        ComplexField u = u0;
        for (std::size_t n = 1; n <= steps; ++n)
        {
            double drift = 0.0;
            u = propagator.step(u, &drift);
            h.relative_drift.push_back(drift);
            h.columns.col(static_cast<Eigen::Index>(n)) = u.samples;
        }
        return h;
    }

    double FieldHistory::max_drift() const
    {
        return relative_drift.empty() ? 0.0 : *std::max_element(relative_drift.begin(), relative_drift.end());
    }

    Eigen::MatrixXd FieldHistory::intensity() const { return columns.cwiseAbs2(); }

    // ---------------------------------------------------------------------------------------------

    PowerDensity intensity(const ComplexField &u, double target_sum)
    {
        if (!(target_sum > 0.0))
            throw DomainError("Intensity normalization target must be positive.");
        const double total = u.samples.squaredNorm();
        if (!(total > 0.0))
            throw DegenerateError("Cannot normalize the intensity of an all-zero field.");

        PowerDensity p;
        p.z_position = u.z_position;
        p.values = u.samples.cwiseAbs2() * (target_sum / total);
        return p;
    }

    PowerProfile extract_power_profile(const PowerDensity &p, const PropagationGrid &grid, const ArraySpec &array,
                                       double aperture, double angle_deg)
    {
        if (static_cast<std::size_t>(p.values.size()) != grid.ns)
            throw ConfigError("Power density length does not match the grid.");
        const std::size_t m_count = array.num_antennas;
        if (m_count == 0)
            throw ConfigError("Array needs at least one antenna.");

        const double ideal = aperture * static_cast<double>(grid.ns) / (grid.window * static_cast<double>(m_count));
        const auto bin = static_cast<std::size_t>(std::floor(ideal + relative_tolerance));
        if (bin == 0)
            throw ResolutionError("Grid too coarse for " + std::to_string(m_count) + " antennas: floor(D Ns / (W M)) = 0 with D = " +
                                  describe(aperture) + ", Ns = " + std::to_string(grid.ns) + ", W = " + describe(grid.window) + ".");
        if (bin * m_count > grid.ns)
            throw ConfigError("Antenna bins span more samples than the window holds.");

        // Bin edges in sample-index coordinates; sample i occupies [i - 1/2, i + 1/2)
        const double center = static_cast<double>(grid.ns / 2);
        const double first_edge = center - static_cast<double>(bin * m_count) / 2.0;

        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_count));
        for (std::size_t m = 0; m < m_count; ++m)
        {
            const double lo = first_edge + static_cast<double>(m * bin);
            const double hi = lo + static_cast<double>(bin);
            const auto i_begin = static_cast<long>(std::floor(lo + 0.5));
            const auto i_end = static_cast<long>(std::ceil(hi + 0.5));
            double acc = 0.0;
            for (long i = std::max(0L, i_begin); i < std::min(static_cast<long>(grid.ns), i_end); ++i)
            {
                const double cell_lo = static_cast<double>(i) - 0.5;
                const double overlap = std::min(hi, cell_lo + 1.0) - std::max(lo, cell_lo);
                if (overlap > 0.0)
                    acc += overlap * p.values[i];
            }
            a[static_cast<Eigen::Index>(m)] = acc;
        }
        return normalized_profile(std::move(a), angle_deg);
    }

    FocalPeak find_focal_peak(const FieldHistory &history, double aperture)
    {
        if (history.columns.cols() == 0)
            throw ConfigError("Empty field history.");

        const PropagationGrid &g = history.grid;
        double reference = 0.0;
        std::size_t inside = 0;
        for (std::size_t i = 0; i < g.ns; ++i)
        {
            if (std::abs(g.x(i)) <= aperture / 2.0 * (1.0 + relative_tolerance))
            {
                reference += std::norm(history.columns(static_cast<Eigen::Index>(i), 0));
                ++inside;
            }
        }
        if (inside == 0 || !(reference > 0.0))
            throw DegenerateError("Lens plane carries no power inside the aperture.");
        reference /= static_cast<double>(inside);

        FocalPeak best;
        double best_value = -1.0;
        for (Eigen::Index n = 0; n < history.columns.cols(); ++n)
        {
            Eigen::Index row = 0;
            const double v = history.columns.col(n).cwiseAbs2().maxCoeff(&row);
            if (v > best_value)
            {
                best_value = v;
                best.step = static_cast<std::size_t>(n);
                best.sample = static_cast<std::size_t>(row);
            }
        }
        best.distance = static_cast<double>(best.step) * history.step;
        best.intensity_gain = best_value / reference;

        if (history.steps() > 0 && best.step == history.steps())
            throw RangeTooShortError("Intensity maximum lies on the last plane (z = " + describe(best.distance) +
                                     "); extend the propagation range.");
        return best;
    }

    double guard_band_fraction(const ComplexField &u)
    {
        const auto n = static_cast<std::size_t>(u.samples.size());
        const auto band = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
        double outer = 0.0;
        for (std::size_t i = 0; i < band; ++i)
            outer += std::norm(u.samples[static_cast<Eigen::Index>(i)]) + std::norm(u.samples[static_cast<Eigen::Index>(n - 1 - i)]);
        const double total = u.samples.squaredNorm();
        return total > 0.0 ? outer / total : 0.0;
    }

    PowerProfile bpm_power_profile(const LensSpec &lens, const PropagationGrid &grid, const ArraySpec &array, double aod_deg)
    {
        const double ratio = array.lens_distance / grid.dz;
        const double steps = std::round(ratio);
        if (std::abs(ratio - steps) > relative_tolerance * std::max(1.0, ratio) || steps < 1.0)
            throw ConfigError("Lens-to-array distance " + describe(array.lens_distance) + " is not a positive multiple of dz = " +
                              describe(grid.dz) + ".");

        const BeamPropagator propagator(grid, grid.dz);
        ComplexField u = lens_phase_profile(lens, grid, deg_to_rad(aod_deg));
        for (std::size_t n = 0; n < static_cast<std::size_t>(steps); ++n)
            u = propagator.step(u);

        return extract_power_profile(intensity(u, static_cast<double>(array.num_antennas)), grid, array, lens.aperture, aod_deg);
    }

    PropagationGrid default_grid(const LensSpec &lens, const ArraySpec &array)
    {
        const double dx = array.spacing / 2.0;
        const double window = std::ceil(4.0 * lens.aperture / (2.0 * dx) - relative_tolerance) * 2.0 * dx;
        return PropagationGrid::make(dx, 1.0, window);
    }

    ArraySpec ArraySpec::make(std::size_t num_antennas, double spacing, double lens_distance)
    {
        if (num_antennas == 0)
            throw ConfigError("Array needs at least one antenna.");
        if (!(spacing > 0.0))
            throw ConfigError("Antenna spacing must be positive.");
        if (!(lens_distance > 0.0))
            throw ConfigError("Lens-to-array distance must be positive.");
        return ArraySpec{num_antennas, spacing, lens_distance};
    }
}
