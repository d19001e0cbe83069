#include "cheeger/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace cheeger {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round_sig(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::random_device rd;
    const fs::path tmp = dir / (path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string field_csv(const ScalarField& field) {
    const Grid2D& g = field.grid();
    std::string out = "x,y,value\n";
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.inside(i, j)) {
                const Point2 pt = g.node(i, j);
                out += format_number(pt.x) + "," + format_number(pt.y) + "," + format_number(field.at(i, j)) + "\n";
            }
    return out;
}

namespace {

template <class T>
void put_le(std::string& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw IoError("binary field dump is truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
    pos += 8;
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace

std::string field_binary(const ScalarField& field) {
    const Grid2D& g = field.grid();
    std::string out;
    out.reserve(40 + 8 * g.node_count());
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.nx()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.ny()));
    put_le<double>(out, g.spacing());
    put_le<double>(out, g.origin().x);
    put_le<double>(out, g.origin().y);
    for (double v : field.values()) put_le<double>(out, v);
    return out;
}

RawGrid parse_field_binary(const std::string& bytes) {
    std::size_t pos = 0;
    RawGrid r;
    r.nx = get_le<std::uint64_t>(bytes, pos);
    r.ny = get_le<std::uint64_t>(bytes, pos);
    r.spacing = get_le<double>(bytes, pos);
    r.origin.x = get_le<double>(bytes, pos);
    r.origin.y = get_le<double>(bytes, pos);
    if (r.nx == 0 || r.ny == 0 || r.nx > (1u << 20) || r.ny > (1u << 20)) throw IoError("binary field dump has bad dimensions");
    const std::size_t n = static_cast<std::size_t>(r.nx * r.ny);
    if (bytes.size() != 40 + 8 * n) throw IoError("binary field dump has the wrong length");
    r.values.resize(n);
    for (auto& v : r.values) v = get_le<double>(bytes, pos);
    return r;
}

std::string contours_csv(const ScalarField& field, const std::vector<double>& thresholds) {
    std::string out = "level_index,segment_index,x,y\n";
    for (std::size_t l = 0; l < thresholds.size(); ++l) {
        const auto segs = superlevel_contour(field, thresholds[l]);
        for (std::size_t s = 0; s < segs.size(); ++s)
            for (const Point2& pt : {segs[s].a, segs[s].b})
                out += std::to_string(l) + "," + std::to_string(s) + "," + format_number(pt.x) + "," +
                       format_number(pt.y) + "\n";
    }
    return out;
}

std::string contour_svg(const ScalarField& field, double t) {
    const DomainSpec& d = field.grid().domain();
    const BoundingBox box = d.bounds();
    const double margin = 0.05 * std::max(box.width(), box.height());
    const double size = 512.0;
    const double scale = size / (std::max(box.width(), box.height()) + 2 * margin);
    auto X = [&](double x) { return format_number((x - box.lo.x + margin) * scale); };
    auto Y = [&](double y) { return format_number((box.hi.y + margin - y) * scale); };
    const double w = (box.width() + 2 * margin) * scale;
    const double h = (box.height() + 2 * margin) * scale;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(w) << "\" height=\""
       << format_number(h) << "\" viewBox=\"0 0 " << format_number(w) << " " << format_number(h) << "\">\n";
    os << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"";
    const auto outline = d.outline(256);
    for (std::size_t k = 0; k < outline.size(); ++k)
        os << (k == 0 ? "M" : " L") << X(outline[k].x) << " " << Y(outline[k].y);
    os << " Z\"/>\n";
    os << "<path fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1\" d=\"";
    for (const auto& s : superlevel_contour(field, t))
        os << "M" << X(s.a.x) << " " << Y(s.a.y) << " L" << X(s.b.x) << " " << Y(s.b.y) << " ";
    os << "\"/>\n</svg>\n";
    return os.str();
}

}  // namespace cheeger
