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

#ifndef LENSMIMO_WAVEOPTICS_HPP
#define LENSMIMO_WAVEOPTICS_HPP

#include "lensmimo/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// Scalar-wave beam propagation through a thin dielectric lens.
//
// All lengths are in units of the free-space wavelength unless a grid with a
// different wavelength is constructed explicitly. The transverse axis is sampled
// at x_m = m * dx for m in [-ns/2, ns/2); sample index i in [0, ns) maps to
// m = i - ns/2, so x = 0 sits at index ns/2.

namespace lensmimo::waveoptics
{
    // How the Fresnel propagator for one axial step is discretized.
    //   transfer_function: exp(-j pi lambda dz fx^2) evaluated on the FFT frequency grid
    //   sampled_impulse:   FFT of the sampled chirp exp(j kappa x^2 / (2 dz)) times
    //                      exp(j kappa dz) / (j lambda dz) * dx
    // The sampled impulse response is only usable when dx <= lambda dz / window;
    // for dx = dz = lambda it collapses to exp(j pi m^2) = (-1)^m.
    enum class FresnelKernel
    {
        transfer_function,
        sampled_impulse
    };

    std::string to_string(FresnelKernel kernel);
    FresnelKernel fresnel_kernel_from_string(const std::string &name);

    struct PropagationGrid
    {
        double wavelength = 1.0;
        double dx = 1.0;     // transverse sample spacing
        double dz = 1.0;     // axial step
        double window = 0.0; // transverse extent W
        std::size_t ns = 0;  // W / dx
        FresnelKernel kernel = FresnelKernel::transfer_function;

        // Validates dx, dz, wavelength > 0 and that window is an even integer multiple of dx.
        static PropagationGrid make(double dx, double dz, double window, double wavelength = 1.0,
                                    FresnelKernel kernel = FresnelKernel::transfer_function);

        double kappa() const;
        double x(std::size_t index) const;
        // Number of samples with |x| <= half_width
        std::size_t samples_within(double half_width) const;
    };

    struct LensSpec
    {
        double focal_length = 0.0;
        double aperture = 0.0;
        double permittivity = 0.0;
        std::optional<double> radius_1;
        std::optional<double> radius_2;

        // n > 1, f > 0, D > 0 (D = 0 allowed for the thickness formula only)
        static LensSpec make(double focal_length, double aperture, double permittivity);

        // Focal length from the lensmaker relation 1/f = (n - 1)(1/R1 - 1/R2).
        static LensSpec from_radii(double radius_1, double radius_2, double aperture, double permittivity);

        double refractive_index() const;
        double thickness() const;
        double contour_a() const; // n^2 - 1
        double contour_b() const; // n f / (n + 1)
        double contour_c() const; // (n - 1) f^2 / (n + 1)
    };

    struct ArraySpec
    {
        std::size_t num_antennas = 0;
        double spacing = 0.5;
        double lens_distance = 25.0;

        static ArraySpec make(std::size_t num_antennas, double spacing, double lens_distance);
        double span() const { return (static_cast<double>(num_antennas) - 1.0) * spacing; }
    };

    struct ComplexField
    {
        Eigen::VectorXcd samples;
        double z_position = 0.0;
        PropagationGrid grid;
        double power_target = 1.0; // sum |u|^2 is held at this value

        double total_power() const { return samples.squaredNorm(); }
    };

    struct PowerDensity
    {
        Eigen::VectorXd values;
        double z_position = 0.0;
    };

    // Column n holds the field after n propagation steps.
    struct FieldHistory
    {
        Eigen::MatrixXcd columns;
        PropagationGrid grid;
        double step = 1.0;                  // axial distance between columns
        std::vector<double> relative_drift; // |P_before - P_after| / P_before prior to renormalization, per step

        std::size_t steps() const { return static_cast<std::size_t>(columns.cols()) - 1; }
        double max_drift() const;
        Eigen::MatrixXd intensity() const; // |u|^2, same shape as columns
    };

    struct FocalPeak
    {
        double distance = 0.0;
        double intensity_gain = 0.0; // peak intensity / mean in-aperture intensity at the lens plane
        std::size_t step = 0;
        std::size_t sample = 0;
    };

    // ---- lens geometry ----

    double lens_thickness(double focal_length, double aperture, double refractive_index);

    // y1 = [(n^2 - 1)(x1 - f)^2 + 2(n - 1)(x1 - f) f]^(1/2)
    double hyperbolic_contour(const LensSpec &lens, double x1);

    // Same contour through y1^2 = A (x1 - B)^2 - C
    double hyperbolic_contour_abc(const LensSpec &lens, double x1);

    // ---- beam propagation ----

    // Field just behind the lens for a plane wave at angle aod_rad: quadratic lens
    // phase plus the linear tilt -kappa x sin(aod), hard-truncated to |x| <= D/2 and
    // scaled to unit total power.
    ComplexField lens_phase_profile(const LensSpec &lens, const PropagationGrid &grid, double aod_rad);

    // Holds the one-step transfer kernel and FFT plans for a fixed grid size and step
    // length. Immutable after construction; step() may be called concurrently.
    class BeamPropagator
    {
    public:
        BeamPropagator(const PropagationGrid &grid, double step_length);
        ~BeamPropagator();
        BeamPropagator(BeamPropagator &&) noexcept;
        BeamPropagator &operator=(BeamPropagator &&) noexcept;

        // Advances u by one step, renormalizes to u.power_target and reports the
        // relative power drift observed before renormalization.
        ComplexField step(const ComplexField &u, double *relative_drift = nullptr) const;

        double step_length() const { return step_length_; }
        const Eigen::VectorXcd &kernel() const { return kernel_; }

    private:
        struct Plans;
        PropagationGrid grid_;
        double step_length_;
        Eigen::VectorXcd kernel_;
        std::unique_ptr<Plans> plans_;
    };

    // Single step of grid.dz (builds a temporary propagator).
    ComplexField bpm_step(const ComplexField &u);

    // steps x grid.dz worth of propagation; column 0 is u0.
    FieldHistory propagate(const ComplexField &u0, std::size_t steps);
    FieldHistory propagate(const ComplexField &u0, std::size_t steps, double step_length);

    // p = c |u|^2 with c chosen so that sum(p) = target_sum.
    PowerDensity intensity(const ComplexField &u, double target_sum);

    // Bins the density into M antenna bins of floor(D ns / (W M)) samples each,
    // centered on x = 0. Samples straddling a bin edge are split by overlap, and
    // power outside the covered span is redistributed so the result sums to M.
    PowerProfile extract_power_profile(const PowerDensity &p, const PropagationGrid &grid, const ArraySpec &array,
                                       double aperture, double angle_deg = 0.0);

    // Global intensity maximum over the history, ties toward smaller z. Throws
    // RangeTooShortError if the maximum sits on the last column.
    FocalPeak find_focal_peak(const FieldHistory &history, double aperture);

    // Fraction of total power in the outer 10% of the window (5% per side). Runs
    // exceeding guard_band_limit are flagged as suffering from FFT wraparound.
    double guard_band_fraction(const ComplexField &u);
    inline constexpr double guard_band_limit = 0.01;

    // Full pipeline for one angle: lens field, propagation to the array plane, binning.
    // lens_distance must be an integer multiple of grid.dz.
    PowerProfile bpm_power_profile(const LensSpec &lens, const PropagationGrid &grid, const ArraySpec &array,
                                   double aod_deg);

    // Default grid for link-level profiles: dx = d / 2, W = 4 D, dz = 1.
    PropagationGrid default_grid(const LensSpec &lens, const ArraySpec &array);
}

#endif
