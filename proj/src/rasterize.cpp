#include "crownnet/rasterize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace crownnet {

int GridSpec::bin(double offset) const {
    const double idx = std::floor(offset / pixel_size + 0.5) + pixels / 2;
    return (idx >= 0 && idx < pixels) ? static_cast<int>(idx) : -1;
}

CrownCloud rotate_about_apex(const CrownCloud& crown, double degrees) {
    CrownCloud out = crown;
    if (crown.points.empty()) return out;
    const double rad = degrees * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const auto& apex = crown.apex_point();
    const double ax = apex.x, ay = apex.y;
    for (auto& p : out.points) {
        const double dx = p.x - ax, dy = p.y - ay;
        p.x = ax + (c * dx - s * dy);
        p.y = ay + (s * dx + c * dy);
    }
    return out;
}

namespace {

bool higher(const LidarPoint& a, const LidarPoint& b) {
    return a.z > b.z || (a.z == b.z && a.intensity > b.intensity);
}

int season_slot(Season s) { return s == Season::LeafOn ? 0 : 1; }

Image zero_image(int n) { return Image::Zero(n, n); }

// Highest point per pixel and season; returns indices, -1 for empty pixels.
std::array<std::vector<int>, 2> highest_per_pixel(const CrownCloud& crown, const GridSpec& grid) {
    const auto n = static_cast<std::size_t>(grid.pixels) * grid.pixels;
    std::array<std::vector<int>, 2> best{std::vector<int>(n, -1), std::vector<int>(n, -1)};
    const auto& apex = crown.apex_point();
    for (std::size_t i = 0; i < crown.points.size(); ++i) {
        const auto& p = crown.points[i];
        const int col = grid.bin(p.x - apex.x);
        const int row = grid.bin(p.y - apex.y);
        if (col < 0 || row < 0) continue;
        int& slot = best[season_slot(p.season)][static_cast<std::size_t>(row) * grid.pixels + col];
        if (slot < 0 || higher(p, crown.points[static_cast<std::size_t>(slot)])) slot = static_cast<int>(i);
    }
    return best;
}

}  // namespace

Dsm4 make_dsm4(const CrownCloud& crown) {
    if (crown.points.empty()) throw ValidationError("cannot rasterize an empty crown");
    const GridSpec& g = kDsmGrid;
    Dsm4 out;
    for (auto& ch : out.channels) ch = zero_image(g.pixels);
    const auto best = highest_per_pixel(crown, g);
    for (int season = 0; season < 2; ++season) {
        auto& height = out.channels[2 * season];
        auto& intensity = out.channels[2 * season + 1];
        for (int r = 0; r < g.pixels; ++r)
            for (int c = 0; c < g.pixels; ++c) {
                const int idx = best[season][static_cast<std::size_t>(r) * g.pixels + c];
                if (idx < 0) continue;
                const auto& p = crown.points[static_cast<std::size_t>(idx)];
                height(r, c) = static_cast<float>(p.z);
                intensity(r, c) = static_cast<float>(p.intensity);
            }
    }
    out.crown_area = crown.area;
    return out;
}

Views4 make_views4(const CrownCloud& crown) {
    if (crown.points.empty()) throw ValidationError("cannot rasterize an empty crown");
    const GridSpec& g = kViewGrid;
    Views4 out;
    for (auto& im : out.images) im = zero_image(g.pixels);

    const auto best = highest_per_pixel(crown, g);
    for (int season = 0; season < 2; ++season) {
        auto& aerial = out.images[season];
        for (int r = 0; r < g.pixels; ++r)
            for (int c = 0; c < g.pixels; ++c) {
                const int idx = best[season][static_cast<std::size_t>(r) * g.pixels + c];
                if (idx >= 0) aerial(r, c) = static_cast<float>(crown.points[static_cast<std::size_t>(idx)].intensity);
            }
    }

    const auto& apex = crown.apex_point();
    std::array<Eigen::ArrayXXd, 2> sum{Eigen::ArrayXXd::Zero(g.pixels, g.pixels),
                                       Eigen::ArrayXXd::Zero(g.pixels, g.pixels)};
    std::array<Eigen::ArrayXXi, 2> count{Eigen::ArrayXXi::Zero(g.pixels, g.pixels),
                                         Eigen::ArrayXXi::Zero(g.pixels, g.pixels)};
    for (const auto& p : crown.points) {
        if (std::abs(p.y - apex.y) > kProfileHalfThickness) continue;
        const int col = g.bin(p.x - apex.x);
        const double depth = std::floor((apex.z - p.z) / g.pixel_size);
        if (col < 0 || !(depth >= 0 && depth < g.pixels)) continue;
        const int row = static_cast<int>(depth);
        const int s = season_slot(p.season);
        sum[s](row, col) += p.intensity;
        count[s](row, col) += 1;
    }
    for (int s = 0; s < 2; ++s)
        out.images[2 + s] = (count[s] > 0).select(sum[s] / count[s].cast<double>().max(1), 0.0).cast<float>();

    out.tree_height = crown.tree_height;
    out.crown_width = crown.width;
    return out;
}

RepresentationSet augment_rotations(const CrownCloud& crown, Species label, CrownClass crown_class,
                                    const AugmentOptions& opts) {
    if (opts.count < 1) throw ValidationError("augmentation count must be at least 1");
    RepresentationSet set;
    set.crown_id = crown.crown_id;
    set.label = label;
    set.crown_class = crown_class;
    set.crown_area = crown.area;
    set.tree_height = crown.tree_height;
    set.crown_width = crown.width;
    set.entries.reserve(static_cast<std::size_t>(opts.count));
    for (int k = 0; k < opts.count; ++k) {
        AugmentedRepresentation e;
        e.rotation_degrees = k * opts.step_degrees;
        const CrownCloud rotated = k == 0 ? crown : rotate_about_apex(crown, e.rotation_degrees);
        if (opts.with_dsm) e.dsm = make_dsm4(rotated);
        if (opts.with_views) e.views = make_views4(rotated);
        set.entries.push_back(std::move(e));
    }
    return set;
}

Dsm4 scale_for_network(const Dsm4& rep) {
    Dsm4 out = rep;
    for (int season = 0; season < 2; ++season) {
        out.channels[2 * season] /= static_cast<float>(NetworkScaling::height);
        out.channels[2 * season + 1] /= static_cast<float>(NetworkScaling::intensity);
    }
    out.crown_area = rep.crown_area / NetworkScaling::crown_area;
    return out;
}

Views4 scale_for_network(const Views4& rep) {
    Views4 out = rep;
    for (auto& im : out.images) im /= static_cast<float>(NetworkScaling::intensity);
    out.tree_height = rep.tree_height / NetworkScaling::tree_height;
    out.crown_width = rep.crown_width / NetworkScaling::crown_width;
    return out;
}

// ---------------------------------------------------------------------------
// Binary store

namespace {

constexpr std::uint16_t kStoreVersion = 1;

void put_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_f32(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("truncated tensor file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2)) throw ValidationError("truncated tensor file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

const std::array<Image, 4>& planes(const AugmentedRepresentation& e, RepresentationKind kind) {
    if (kind == RepresentationKind::Dsm4) {
        if (!e.dsm) throw ValidationError("representation set lacks DSM4 entries");
        return e.dsm->channels;
    }
    if (!e.views) throw ValidationError("representation set lacks Views4 entries");
    return e.views->images;
}

}  // namespace

TensorStoreWriter::TensorStoreWriter(std::filesystem::path bin_path, std::filesystem::path manifest_path,
                                     RepresentationKind kind)
    : manifest_path_(std::move(manifest_path)), kind_(kind) {
    const int pixels = kind == RepresentationKind::Dsm4 ? kDsmGrid.pixels : kViewGrid.pixels;
    if (bin_path.has_parent_path()) std::filesystem::create_directories(bin_path.parent_path());
    out_.open(bin_path, std::ios::binary);
    if (!out_) throw std::runtime_error("cannot write file: " + bin_path.string());
    out_.write("CRWN", 4);
    put_u16(out_, kStoreVersion);
    put_u32(out_, kind == RepresentationKind::Dsm4 ? 0u : 1u);
    put_u32(out_, 4);
    put_u32(out_, static_cast<std::uint32_t>(pixels));
    put_u32(out_, static_cast<std::uint32_t>(pixels));

    manifest_["kind"] = kind == RepresentationKind::Dsm4 ? "dsm4" : "views4";
    manifest_["channels"] = 4;
    manifest_["height"] = pixels;
    manifest_["width"] = pixels;
    manifest_["crowns"] = nlohmann::ordered_json::object();
}

void TensorStoreWriter::add(const RepresentationSet& set) {
    const auto offset = static_cast<std::uint64_t>(out_.tellp());
    put_u32(out_, static_cast<std::uint32_t>(set.entries.size()));
    for (const auto& e : set.entries) {
        for (const auto& plane : planes(e, kind_))
            for (Eigen::Index i = 0; i < plane.size(); ++i) put_f32(out_, plane.data()[i]);
        put_f32(out_, static_cast<float>(set.crown_area));
        put_f32(out_, static_cast<float>(set.tree_height));
        put_f32(out_, static_cast<float>(set.crown_width));
    }
    manifest_["crowns"][set.crown_id] = {{"offset", offset},
                                         {"records", set.entries.size()},
                                         {"label", std::string(to_string(set.label))},
                                         {"crown_class", std::string(to_string(set.crown_class))}};
}

void TensorStoreWriter::finish() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing tensor store");
    std::ofstream mf(manifest_path_);
    if (!mf) throw std::runtime_error("cannot write file: " + manifest_path_.string());
    mf << manifest_.dump(2) << '\n';
}

void write_tensor_store(const std::filesystem::path& bin_path, const std::filesystem::path& manifest_path,
                        std::span<const RepresentationSet> sets, RepresentationKind kind) {
    TensorStoreWriter writer(bin_path, manifest_path, kind);
    for (const auto& set : sets) writer.add(set);
    writer.finish();
}

TensorStoreHeader read_tensor_header(const std::filesystem::path& bin_path) {
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open input file: " + bin_path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "CRWN", 4) != 0) throw ValidationError("not a CRWN tensor file");
    if (get_u16(in) != kStoreVersion) throw ValidationError("unsupported CRWN version");
    TensorStoreHeader h;
    h.kind = get_u32(in) == 0 ? RepresentationKind::Dsm4 : RepresentationKind::Views4;
    h.channels = get_u32(in);
    h.height = get_u32(in);
    h.width = get_u32(in);
    return h;
}

std::map<std::string, TensorStoreEntry> read_tensor_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot open input file: " + manifest_path.string());
    const auto doc = nlohmann::json::parse(in);
    std::map<std::string, TensorStoreEntry> out;
    for (const auto& [id, v] : doc.at("crowns").items()) {
        TensorStoreEntry e;
        e.offset = v.at("offset").get<std::uint64_t>();
        e.records = v.at("records").get<std::uint32_t>();
        e.label = parse_species(v.at("label").get<std::string>());
        e.crown_class = parse_crown_class(v.at("crown_class").get<std::string>());
        out.emplace(id, e);
    }
    return out;
}

std::vector<TensorRecord> read_tensor_records(const std::filesystem::path& bin_path, std::uint64_t offset) {
    const auto header = read_tensor_header(bin_path);
    std::ifstream in(bin_path, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(offset));
    const std::uint32_t count = get_u32(in);
    const std::size_t n = static_cast<std::size_t>(header.channels) * header.height * header.width;
    std::vector<TensorRecord> records(count);
    for (auto& r : records) {
        r.values.resize(n);
        for (auto& v : r.values) v = get_f32(in);
        for (auto& s : r.scalars) s = get_f32(in);
    }
    return records;
}

}  // namespace crownnet
