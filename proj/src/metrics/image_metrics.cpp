#include "rara/errors.hpp"
#include "rara/metrics.hpp"

#include <array>
#include <cmath>

namespace rara {
namespace {

void require_same_size(const Image& a, const Image& b, const char* op) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ParameterError(std::string(op) + ": image dimensions differ");
    }
}

double to_8bit(float v) { return 255.0 * std::clamp(static_cast<double>(v), 0.0, 1.0); }

std::array<double, kSsimWindow> gaussian_window() {
    std::array<double, kSsimWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double x = i - kSsimWindow / 2;
        w[i] = std::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
        sum += w[i];
    }
    for (auto& v : w) {
        v /= sum;
    }
    return w;
}

// Separable "valid" filtering: output is (w - 10) x (h - 10).
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h) {
    static const auto window = gaussian_window();
    const int ow = w - kSsimWindow + 1;
    const int oh = h - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += window[k] * in[static_cast<std::size_t>(y) * w + x + k];
            }
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += window[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            }
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

double l1_error(const Image& a, const Image& b) {
    require_same_size(a, b, "l1_error");
    const auto pa = a.pixels();
    const auto pb = b.pixels();
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            sum += std::abs(to_8bit(pa[i][c]) - to_8bit(pb[i][c]));
        }
    }
    return sum / (3.0 * static_cast<double>(pa.size()));
}

double luma601(const Eigen::Vector3f& rgb) {
    return 0.299 * to_8bit(rgb.x()) + 0.587 * to_8bit(rgb.y()) + 0.114 * to_8bit(rgb.z());
}

double ssim(const Image& a, const Image& b) {
    require_same_size(a, b, "ssim");
    const int w = a.width();
    const int h = a.height();
    if (w < kSsimWindow || h < kSsimWindow) {
        throw ParameterError("ssim: image sides must be at least 11 pixels");
    }
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> la(n), lb(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        la[i] = luma601(a.pixels()[i]);
        lb[i] = luma601(b.pixels()[i]);
        aa[i] = la[i] * la[i];
        bb[i] = lb[i] * lb[i];
        ab[i] = la[i] * lb[i];
    }
    const auto mu_a = filter_valid(la, w, h);
    const auto mu_b = filter_valid(lb, w, h);
    const auto e_aa = filter_valid(aa, w, h);
    const auto e_bb = filter_valid(bb, w, h);
    const auto e_ab = filter_valid(ab, w, h);

    const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
    const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

} // namespace rara
