// Copyright 2026 The JEI Surface Editing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jei/volume.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace jei {

std::string to_hex(std::uint64_t v) {
    char buf[17];
    auto [end, ec] = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, end);
    return std::string(16 - s.size(), '0') + s;
}

Volume::Volume(Index3 dims, Vec3 spacing, Vec3 origin, std::vector<float> data)
    : dims_(dims), spacing_(spacing), origin_(origin), data_(std::move(data)) {
    for (int a = 0; a < 3; ++a) {
        if (dims_[a] < 2) throw Error("volume dims must be >= 2 along every axis");
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
            throw Error("volume spacing must be positive and finite");
        if (!std::isfinite(origin_[a])) throw Error("volume origin must be finite");
    }
    const std::size_t expected =
        static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(dims_[2]);
    if (data_.size() != expected) throw Error("data length mismatch");
    for (float f : data_) {
        if (!std::isfinite(f)) throw Error("non-finite voxel value");
        if (f < 0.0f || f > 1.0f) throw Error("voxel value outside [0, 1]");
    }
}

Volume Volume::filled(Index3 dims, Vec3 spacing, Vec3 origin, float value) {
    const std::size_t n = static_cast<std::size_t>(std::max(dims[0], 0)) * std::max(dims[1], 0) * std::max(dims[2], 0);
    return Volume(dims, spacing, origin, std::vector<float>(n, value));
}

Vec3 Volume::extent_max() const {
    return {origin_.x + (dims_[0] - 1) * spacing_.x, origin_.y + (dims_[1] - 1) * spacing_.y,
            origin_.z + (dims_[2] - 1) * spacing_.z};
}

bool Volume::contains(const Vec3& p, double tolerance) const {
    const Vec3 hi = extent_max();
    for (int a = 0; a < 3; ++a)
        if (p[a] < origin_[a] - tolerance || p[a] > hi[a] + tolerance) return false;
    return true;
}

double Volume::min_spacing() const { return std::min({spacing_.x, spacing_.y, spacing_.z}); }

std::uint64_t Volume::digest() const {
    Fnv1a h;
    for (int a = 0; a < 3; ++a) h.value(dims_[a]);
    for (int a = 0; a < 3; ++a) h.value(spacing_[a]);
    for (int a = 0; a < 3; ++a) h.value(origin_[a]);
    h.values(std::span<const float>(data_));
    return h.digest();
}

Sample sample_checked(const Volume& v, const Vec3& p) {
    Sample out;
    int i0[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
        const int n = v.dims()[a];
        double u = (p[a] - v.origin()[a]) / v.spacing()[a];
        if (u < 0.0) {
            if (u < -1e-9) out.clamped = true;
            u = 0.0;
        } else if (u > n - 1) {
            if (u > n - 1 + 1e-9) out.clamped = true;
            u = n - 1;
        }
        int base = static_cast<int>(std::floor(u));
        if (base > n - 2) base = n - 2;
        i0[a] = base;
        f[a] = u - base;
    }
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? f[2] : 1.0 - f[2];
        if (wz == 0.0) continue;
        for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? f[1] : 1.0 - f[1];
            if (wy == 0.0) continue;
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? f[0] : 1.0 - f[0];
                if (wx == 0.0) continue;
                acc += wx * wy * wz * v.at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
            }
        }
    }
    out.value = acc;
    return out;
}

Derivative deriv1(const Volume& v, const Vec3& p, const Vec3& d) {
    const double h = v.derivative_step();
    const Vec3 fwd = p + h * d;
    const Vec3 bwd = p - h * d;
    const bool fwd_in = v.contains(fwd);
    const bool bwd_in = v.contains(bwd);
    if (fwd_in && bwd_in) return {(sample(v, fwd) - sample(v, bwd)) / (2.0 * h), false};
    if (fwd_in) return {(sample(v, fwd) - sample(v, p)) / h, true};
    if (bwd_in) return {(sample(v, p) - sample(v, bwd)) / h, true};
    return {0.0, true};
}

Derivative deriv2(const Volume& v, const Vec3& p, const Vec3& d) {
    const double h = v.derivative_step();
    const Vec3 fwd = p + h * d;
    const Vec3 bwd = p - h * d;
    const bool fwd_in = v.contains(fwd);
    const bool bwd_in = v.contains(bwd);
    if (fwd_in && bwd_in)
        return {(sample(v, fwd) - 2.0 * sample(v, p) + sample(v, bwd)) / (h * h), false};
    // Shift the three-point stencil inward.
    Vec3 c = p;
    if (fwd_in && v.contains(p + 2.0 * h * d)) c = fwd;
    else if (bwd_in && v.contains(p - 2.0 * h * d)) c = bwd;
    else return {0.0, true};
    return {(sample(v, c + h * d) - 2.0 * sample(v, c) + sample(v, c - h * d)) / (h * h), true};
}

namespace {

template <typename T>
void append_number(std::string& out, T value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, end);
}

template <typename T>
T parse_number(std::string_view token, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw Error(std::string("malformed header: bad ") + what + " value '" + std::string(token) + "'");
    return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) parts.push_back(line.substr(start, i - start));
    }
    return parts;
}

}  // namespace

std::vector<std::uint8_t> encode_volume(const Volume& v) {
    std::string header = "EVF1\ndims";
    for (int a = 0; a < 3; ++a) { header += ' '; append_number(header, v.dims()[a]); }
    header += "\nspacing";
    for (int a = 0; a < 3; ++a) { header += ' '; append_number(header, v.spacing()[a]); }
    header += "\norigin";
    for (int a = 0; a < 3; ++a) { header += ' '; append_number(header, v.origin()[a]); }
    header += "\ndata float32-le\n";

    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + v.voxel_count() * 4);
    for (float f : v.data()) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
    return out;
}

Volume decode_volume(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string_view {
        const auto* begin = reinterpret_cast<const char*>(bytes.data());
        std::size_t end = pos;
        while (end < bytes.size() && bytes[end] != '\n') ++end;
        if (end >= bytes.size()) throw Error("malformed header: truncated");
        std::string_view line(begin + pos, end - pos);
        pos = end + 1;
        return line;
    };

    if (next_line() != "EVF1") throw Error("malformed header: missing EVF1 magic");

    auto triple_line = [&](std::string_view key) {
        const auto parts = split_spaces(next_line());
        if (parts.size() != 4 || parts[0] != key)
            throw Error("malformed header: expected '" + std::string(key) + "' line");
        return parts;
    };

    const auto dims_p = triple_line("dims");
    Index3 dims{};
    for (int a = 0; a < 3; ++a) dims[a] = parse_number<int>(dims_p[a + 1], "dims");
    const auto spacing_p = triple_line("spacing");
    Vec3 spacing;
    for (int a = 0; a < 3; ++a) spacing[a] = parse_number<double>(spacing_p[a + 1], "spacing");
    const auto origin_p = triple_line("origin");
    Vec3 origin;
    for (int a = 0; a < 3; ++a) origin[a] = parse_number<double>(origin_p[a + 1], "origin");
    if (next_line() != "data float32-le") throw Error("malformed header: expected 'data float32-le'");

    for (int a = 0; a < 3; ++a)
        if (dims[a] < 2) throw Error("malformed header: dims must be >= 2");
    const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    const std::size_t payload = bytes.size() - pos;
    if (payload != count * 4) throw Error("data length mismatch");

    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[pos + 4 * i + b]) << (8 * b);
        data[i] = std::bit_cast<float>(bits);
    }
    return Volume(dims, spacing, origin, std::move(data));
}

Volume load_volume(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open volume file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_volume(bytes);
}

void save_volume(const Volume& v, const std::filesystem::path& path) {
    const auto bytes = encode_volume(v);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write volume file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing volume file: " + path.string());
}

}  // namespace jei
