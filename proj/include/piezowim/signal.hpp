// Copyright 2026 The piezowim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Short-time spectra and cross-spectral FRF estimation.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "piezowim/errors.hpp"

namespace piezowim {

/// Periodic Hann window of length n.
inline std::vector<double> hann_window(int n) {
  detail::require(n >= 1, "window length must be >= 1");
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k)
    w[k] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * k / n);
  return w;
}

struct Spectrogram {
  std::vector<double> t_centers;  // [s]
  std::vector<double> f_bins;     // [Hz]
  // magnitude(k, m): one-sided energy in bin k of frame m, scaled so that
  // each column sums to the windowed frame energy sum(w^2 x^2).
  Eigen::MatrixXd magnitude;
  double windowed_energy = 0;
  int window_len = 0;
  int hop = 0;
  double fs = 0;

  double total_energy() const { return magnitude.sum(); }
  int peak_bin(int frame) const {
    Eigen::Index k;
    magnitude.col(frame).maxCoeff(&k);
    return static_cast<int>(k);
  }
};

namespace detail {

inline int hop_length(int window_len, double overlap) {
  detail::require(overlap >= 0 && overlap < 1, "overlap must lie in [0, 1)");
  return std::max(1, static_cast<int>(std::lround(window_len * (1 - overlap))));
}

inline std::vector<std::complex<double>> windowed_fft(Eigen::FFT<double>& fft,
                                                      std::span<const double> x, int start,
                                                      const std::vector<double>& w) {
  std::vector<std::complex<double>> in(w.size()), out;
  for (std::size_t n = 0; n < w.size(); ++n) in[n] = w[n] * x[start + n];
  fft.fwd(out, in);
  return out;
}

}  // namespace detail

/// Hann-windowed STFT with one-sided magnitude-squared bins.
inline Spectrogram stft_spectrogram(std::span<const double> x, double fs, int window_len,
                                    double overlap = 0.5) {
  detail::require(fs > 0, "sampling rate must be > 0");
  detail::require(window_len >= 2, "window length must be >= 2");
  detail::require(static_cast<std::size_t>(window_len) <= x.size(),
                  "window longer than signal");
  Spectrogram sg;
  sg.window_len = window_len;
  sg.hop = detail::hop_length(window_len, overlap);
  sg.fs = fs;
  const auto w = hann_window(window_len);
  const int n_frames = 1 + static_cast<int>((x.size() - window_len) / sg.hop);
  const int n_bins = window_len / 2 + 1;
  const bool even = window_len % 2 == 0;
  sg.magnitude.resize(n_bins, n_frames);
  for (int k = 0; k < n_bins; ++k) sg.f_bins.push_back(k * fs / window_len);

  Eigen::FFT<double> fft;
  for (int m = 0; m < n_frames; ++m) {
    const int start = m * sg.hop;
    sg.t_centers.push_back((start + 0.5 * window_len) / fs);
    const auto X = detail::windowed_fft(fft, x, start, w);
    for (int k = 0; k < n_bins; ++k) {
      const bool single = k == 0 || (even && k == n_bins - 1);
      sg.magnitude(k, m) = (single ? 1.0 : 2.0) * std::norm(X[k]) / window_len;
    }
    for (int n = 0; n < window_len; ++n) sg.windowed_energy += std::pow(w[n] * x[start + n], 2);
  }
  return sg;
}

struct FrfEstimate {
  std::vector<double> f;
  std::vector<std::complex<double>> H;
  std::vector<double> coherence;
};

/// Welch-averaged H1 estimate Sxy/Sxx between input x and output y.
inline FrfEstimate estimate_frf_h1(std::span<const double> x, std::span<const double> y,
                                   double fs, int window_len, double overlap = 0.5) {
  detail::require(x.size() == y.size(), "input and output lengths differ");
  detail::require(fs > 0, "sampling rate must be > 0");
  detail::require(window_len >= 2 && static_cast<std::size_t>(window_len) <= x.size(),
                  "window length must lie in [2, signal length]");
  const int hop = detail::hop_length(window_len, overlap);
  const auto w = hann_window(window_len);
  const int n_bins = window_len / 2 + 1;
  std::vector<double> sxx(n_bins, 0), syy(n_bins, 0);
  std::vector<std::complex<double>> sxy(n_bins, 0);
  Eigen::FFT<double> fft;
  for (std::size_t start = 0; start + window_len <= x.size(); start += hop) {
    const auto X = detail::windowed_fft(fft, x, static_cast<int>(start), w);
    const auto Y = detail::windowed_fft(fft, y, static_cast<int>(start), w);
    for (int k = 0; k < n_bins; ++k) {
      sxx[k] += std::norm(X[k]);
      syy[k] += std::norm(Y[k]);
      sxy[k] += std::conj(X[k]) * Y[k];
    }
  }
  FrfEstimate est;
  for (int k = 0; k < n_bins; ++k) {
    est.f.push_back(k * fs / window_len);
    est.H.push_back(sxx[k] > 0 ? sxy[k] / sxx[k] : std::complex<double>(0));
    est.coherence.push_back(sxx[k] > 0 && syy[k] > 0 ? std::norm(sxy[k]) / (sxx[k] * syy[k]) : 0);
  }
  return est;
}

}  // namespace piezowim
