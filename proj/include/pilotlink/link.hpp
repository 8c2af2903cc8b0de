// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "pilotlink/autodiff.hpp"
#include "pilotlink/tensor.hpp"

namespace pl {

// One slot of an OFDM resource grid: nf subcarriers by ns symbols, data
// handled per resource element in the frequency domain.
struct SlotGeometry {
    int nf = 72;
    int ns = 14;
    int nt = 2; // transmit streams
    int nr = 4; // receive antennas
    double scs_hz = 30e3;
    double carrier_hz = 3.5e9;

    void validate() const;
    int res() const { return nf * ns; }
};

enum class TdlProfile { TrainA, TrainB, ValidC };

struct ChannelParams {
    TdlProfile profile = TdlProfile::TrainA;
    double delay_spread_s = 100e-9; // RMS
    double velocity_mps = 0.0;
    int taps = 12;
};

struct Tap {
    double delay_s = 0.0;
    double power = 0.0;
};

// Tapped delay line before fading: delays scaled so the RMS delay spread
// hits the requested value, powers exponential in delay and summing to 1.
std::vector<Tap> tdl_taps(const ChannelParams& p);

// Frequency response per resource element, antenna pair: (nf, ns, nr, nt).
struct ChannelRealization {
    int nf = 0, ns = 0, nr = 0, nt = 0;
    std::vector<std::complex<double>> h;

    std::complex<double>& at(int f, int s, int r, int t) {
        return h[(((static_cast<std::size_t>(f) * ns) + s) * nr + r) * nt + t];
    }
    std::complex<double> at(int f, int s, int r, int t) const {
        return h[(((static_cast<std::size_t>(f) * ns) + s) * nr + r) * nt + t];
    }
};

// Rayleigh block fading across the slot: per-tap gains evolve over the
// symbols with the classic Doppler spectrum (sum of 16 sinusoids with
// complex Gaussian amplitudes), frequency response from the tap delays.
ChannelRealization generate_channel(const SlotGeometry& g, const ChannelParams& p,
                                    std::uint64_t seed);

// Complex grid with nc channels per resource element (streams or antennas).
struct ResourceGrid {
    int nf = 0, ns = 0, nc = 0;
    std::vector<std::complex<double>> v;

    ResourceGrid() = default;
    ResourceGrid(int nf_, int ns_, int nc_)
        : nf(nf_), ns(ns_), nc(nc_),
          v(static_cast<std::size_t>(nf_) * ns_ * nc_) {}
    std::complex<double>& at(int f, int s, int c) {
        return v[((static_cast<std::size_t>(f) * ns) + s) * nc + c];
    }
    std::complex<double> at(int f, int s, int c) const {
        return v[((static_cast<std::size_t>(f) * ns) + s) * nc + c];
    }
};

double noise_variance_from_snr(double snr_db);

// y = Hx + n per resource element. Noise draws are keyed by
// (seed, subcarrier, symbol, antenna) so they are order independent.
ResourceGrid apply_channel(const ResourceGrid& x, const ChannelRealization& h,
                           double noise_var, std::uint64_t seed);

// Training-mode variant: same channel and the same noise draws for the
// same seed, but the TX grid enters as graph nodes. streams[l] is the
// (nf*ns, 2) I/Q tensor of stream l, resource elements frequency-major.
// Output is (nf, ns, 2*nr) with antenna real parts in channels 0..nr-1
// and imaginary parts behind them.
ad::Var apply_channel_ad(const std::vector<ad::Var>& streams, const ChannelRealization& h,
                         double noise_var, std::uint64_t seed);

// Real-plane view of a grid for the receiver: (nf, ns, 2*nc).
Tensor grid_to_planes(const ResourceGrid& g);

} // namespace pl
