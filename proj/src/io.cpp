#include "evspec/io.hpp"

#include <bit>
#include <cmath>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace evspec {

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    return f;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    return f;
}

long long parse_int(std::string_view tok, const char* what, int line_no) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw IoError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" +
                      std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

EventStream read_events(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string line;
    int line_no = 0;

    EventStream stream;
    if (!std::getline(f, line)) throw IoError("empty event file: " + path.string());
    ++line_no;
    {
        auto tok = split(line, ',');
        if (tok.size() != 3 || tok[0] != "# geometry")
            throw IoError("line 1: expected '# geometry,<w>,<h>'");
        stream.geometry.width = int(parse_int(tok[1], "width", line_no));
        stream.geometry.height = int(parse_int(tok[2], "height", line_no));
        if (stream.geometry.width <= 0 || stream.geometry.height <= 0)
            throw IoError("line 1: non-positive geometry");
    }
    if (!std::getline(f, line) || line != "t_us,x,y,p")
        throw IoError("line 2: expected header 't_us,x,y,p'");
    ++line_no;

    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tok = split(line, ',');
        if (tok.size() != 4)
            throw IoError("line " + std::to_string(line_no) + ": expected 4 fields");
        Event e;
        e.t = parse_int(tok[0], "t_us", line_no);
        long long x = parse_int(tok[1], "x", line_no);
        long long y = parse_int(tok[2], "y", line_no);
        long long p = parse_int(tok[3], "p", line_no);
        if (e.t < 0) throw IoError("line " + std::to_string(line_no) + ": negative timestamp");
        if (x < 0 || x >= stream.geometry.width || y < 0 || y >= stream.geometry.height)
            throw IoError("line " + std::to_string(line_no) + ": coordinates out of bounds");
        if (p != 1 && p != -1)
            throw IoError("line " + std::to_string(line_no) + ": polarity must be -1 or 1");
        e.x = std::uint16_t(x);
        e.y = std::uint16_t(y);
        e.p = std::int8_t(p);
        if (!stream.events.empty() && event_order(e, stream.events.back()))
            throw IoError("line " + std::to_string(line_no) + ": events not in canonical order");
        stream.events.push_back(e);
    }
    return stream;
}

void write_events(const EventStream& stream, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "# geometry," << stream.geometry.width << ',' << stream.geometry.height << '\n';
    f << "t_us,x,y,p\n";
    for (const Event& e : stream.events)
        f << e.t << ',' << e.x << ',' << e.y << ',' << int(e.p) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

namespace {

// PNM header token reader: skips whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(char(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(char(c));
    if (tok.empty()) throw IoError("truncated PNM header");
    return tok;
}

int pnm_int(std::istream& in, const char* what) {
    auto tok = pnm_token(in);
    return int(parse_int(tok, what, 0));
}

}  // namespace

ImageGray read_pgm(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    if (pnm_token(f) != "P5") throw IoError("unsupported magic (want P5): " + path.string());
    int w = pnm_int(f, "width"), h = pnm_int(f, "height"), maxval = pnm_int(f, "maxval");
    if (w <= 0 || h <= 0 || maxval != 255) throw IoError("bad PGM header: " + path.string());
    ImageGray img(w, h);
    f.read(reinterpret_cast<char*>(img.data.data()), std::streamsize(img.size()));
    if (f.gcount() != std::streamsize(img.size()))
        throw IoError("truncated PGM payload: " + path.string());
    return img;
}

void write_pgm(const ImageGray& image, const std::filesystem::path& path) {
    auto f = open_out(path, std::ios::binary);
    f << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(image.data.data()), std::streamsize(image.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

ImageRGB read_ppm(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    if (pnm_token(f) != "P6") throw IoError("unsupported magic (want P6): " + path.string());
    int w = pnm_int(f, "width"), h = pnm_int(f, "height"), maxval = pnm_int(f, "maxval");
    if (w <= 0 || h <= 0 || maxval != 255) throw IoError("bad PPM header: " + path.string());
    ImageRGB img(w, h);
    static_assert(sizeof(Rgb8) == 3);
    f.read(reinterpret_cast<char*>(img.data.data()), std::streamsize(img.size() * 3));
    if (f.gcount() != std::streamsize(img.size() * 3))
        throw IoError("truncated PPM payload: " + path.string());
    return img;
}

void write_ppm(const ImageRGB& image, const std::filesystem::path& path) {
    auto f = open_out(path, std::ios::binary);
    f << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(image.data.data()), std::streamsize(image.size() * 3));
    if (!f) throw IoError("write failed: " + path.string());
}

ImageFloat read_pfm(const std::filesystem::path& path) {
    auto f = open_in(path, std::ios::binary);
    if (pnm_token(f) != "Pf") throw IoError("unsupported magic (want Pf): " + path.string());
    int w = pnm_int(f, "width"), h = pnm_int(f, "height");
    double scale = std::stod(pnm_token(f));
    if (w <= 0 || h <= 0 || scale == 0) throw IoError("bad PFM header: " + path.string());
    const bool file_little = scale < 0;
    ImageFloat img(w, h);
    std::vector<float> row(std::size_t(w), 0.0f);
    // PFM stores rows bottom-up.
    for (int y = h - 1; y >= 0; --y) {
        f.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * 4));
        if (f.gcount() != std::streamsize(row.size() * 4))
            throw IoError("truncated PFM payload: " + path.string());
        if (file_little != (std::endian::native == std::endian::little)) {
            for (float& v : row) {
                auto u = std::bit_cast<std::uint32_t>(v);
                u = __builtin_bswap32(u);
                v = std::bit_cast<float>(u);
            }
        }
        std::memcpy(&img.at(0, y), row.data(), row.size() * 4);
    }
    return img;
}

void write_pfm(const ImageFloat& image, const std::filesystem::path& path) {
    auto f = open_out(path, std::ios::binary);
    const double scale = std::endian::native == std::endian::little ? -1.0 : 1.0;
    f << "Pf\n" << image.width << ' ' << image.height << '\n' << scale << '\n';
    for (int y = image.height - 1; y >= 0; --y)
        f.write(reinterpret_cast<const char*>(&image.at(0, y)), std::streamsize(image.width) * 4);
    if (!f) throw IoError("write failed: " + path.string());
}

PointCloud read_pointcloud(const std::filesystem::path& path) {
    auto f = open_in(path);
    PointCloud cloud;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z))
            throw IoError("line " + std::to_string(line_no) + ": expected 3 coordinates");
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw IoError("line " + std::to_string(line_no) + ": non-finite coordinate");
        cloud.push_back(p);
    }
    return cloud;
}

void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path) {
    auto f = open_out(path);
    f.precision(9);
    for (const Vec3& p : cloud) f << p.x << ' ' << p.y << ' ' << p.z << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

DepthMap read_depthmap(const std::filesystem::path& pfm_path, const std::filesystem::path& mask_path) {
    DepthMap d;
    d.values = read_pfm(pfm_path);
    d.mask = read_pgm(mask_path);
    if (d.mask.width != d.values.width || d.mask.height != d.values.height)
        throw IoError("depth/mask dimension mismatch");
    return d;
}

void write_depthmap(const DepthMap& depth, const std::filesystem::path& pfm_path,
                    const std::filesystem::path& mask_path) {
    write_pfm(depth.values, pfm_path);
    write_pgm(depth.mask, mask_path);
}

}  // namespace evspec
