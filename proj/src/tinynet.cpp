#include "crownnet/tinynet.hpp"

#include <cstring>
#include <fstream>

namespace crownnet::nn {

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::Dsm: return "dsm";
        case Architecture::Views: return "views";
        case Architecture::ViewsReduced: return "views_reduced";
    }
    return "views";
}

Architecture parse_architecture(const std::string& s) {
    if (s == "dsm") return Architecture::Dsm;
    if (s == "views") return Architecture::Views;
    if (s == "views_reduced") return Architecture::ViewsReduced;
    throw std::invalid_argument("unknown architecture '" + s + "'");
}

const ArchitectureSpec& spec_for(Architecture a) {
    static const ArchitectureSpec dsm{1, 4, 6, 128, 1, {2, 2}, {25, 10}};
    static const ArchitectureSpec views{4, 1, 5, 64, 2, {4, 2}, {25, 10}};
    static const ArchitectureSpec reduced{2, 1, 5, 64, 2, {4, 2}, {16, 8}};
    switch (a) {
        case Architecture::Dsm: return dsm;
        case Architecture::Views: return views;
        case Architecture::ViewsReduced: return reduced;
    }
    return views;
}

namespace {

constexpr std::uint32_t kSnapshotVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated TNET file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t arch_tag(Architecture a) { return static_cast<std::uint32_t>(a); }

}  // namespace

void save_params(const std::filesystem::path& path, const NetworkParams<float>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out.write("TNET", 4);
    put_u32(out, kSnapshotVersion);
    put_u32(out, arch_tag(params.arch));
    std::uint32_t blocks = 0;
    params.visit([&](const auto&) { ++blocks; });
    put_u32(out, blocks);
    params.visit([&](const auto& b) {
        put_u32(out, static_cast<std::uint32_t>(b.rows()));
        put_u32(out, static_cast<std::uint32_t>(b.cols()));
    });
    const Vec<float> flat = flatten(params);
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &flat[i], 4);
        put_u32(out, bits);
    }
}

NetworkParams<float> load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "TNET", 4) != 0) throw std::runtime_error("not a TNET file");
    if (get_u32(in) != kSnapshotVersion) throw std::runtime_error("unsupported TNET version");
    const std::uint32_t tag = get_u32(in);
    if (tag > 2) throw std::runtime_error("unknown architecture tag in TNET file");
    auto params = init_params<float>(static_cast<Architecture>(tag), 0);
    std::uint32_t blocks = 0;
    params.visit([&](const auto&) { ++blocks; });
    if (get_u32(in) != blocks) throw std::runtime_error("TNET block count does not match architecture");
    bool ok = true;
    params.visit([&](const auto& b) {
        const auto r = get_u32(in), c = get_u32(in);
        ok = ok && r == static_cast<std::uint32_t>(b.rows()) && c == static_cast<std::uint32_t>(b.cols());
    });
    if (!ok) throw std::runtime_error("TNET layer dimensions do not match architecture");
    Vec<float> flat(params.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        const std::uint32_t bits = get_u32(in);
        std::memcpy(&flat[i], &bits, 4);
    }
    unflatten(flat, params);
    return params;
}

}  // namespace crownnet::nn
