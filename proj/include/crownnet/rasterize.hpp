#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "crownnet/types.hpp"

namespace crownnet {

using Image = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raster geometry: square grid of `pixels` at `pixel_size` metres with the apex
/// at the centre of pixel (pixels/2, pixels/2). Rows follow +y, columns +x.
struct GridSpec {
    int pixels = 128;
    double pixel_size = 0.125;

    /// Pixel index along one axis for an apex-relative offset, or -1 outside.
    int bin(double offset) const;
};

inline constexpr GridSpec kDsmGrid{128, 0.125};
inline constexpr GridSpec kViewGrid{64, 0.25};
inline constexpr double kProfileHalfThickness = 0.375;

enum class RepresentationKind { Dsm4, Views4 };

/// Four 128x128 channels: leaf-on height, leaf-on intensity, leaf-off height,
/// leaf-off intensity of the highest point per pixel.
struct Dsm4 {
    std::array<Image, 4> channels;
    double crown_area = 0.0;
};

/// Aerial leaf-on, aerial leaf-off, profile leaf-on, profile leaf-off; 64x64 each.
struct Views4 {
    std::array<Image, 4> images;
    double tree_height = 0.0;
    double crown_width = 0.0;
};

/// Rotates (x, y) about the apex, counter-clockwise in degrees.
CrownCloud rotate_about_apex(const CrownCloud& crown, double degrees);

Dsm4 make_dsm4(const CrownCloud& crown);
Views4 make_views4(const CrownCloud& crown);

struct AugmentedRepresentation {
    double rotation_degrees = 0.0;
    std::optional<Dsm4> dsm;
    std::optional<Views4> views;
};

struct RepresentationSet {
    std::string crown_id;
    Species label = Species::Deciduous;
    CrownClass crown_class = CrownClass::Dominant;
    double crown_area = 0.0;
    double tree_height = 0.0;
    double crown_width = 0.0;
    std::vector<AugmentedRepresentation> entries;
};

struct AugmentOptions {
    int count = 180;
    double step_degrees = 2.0;
    bool with_dsm = true;
    bool with_views = true;
};

RepresentationSet augment_rotations(const CrownCloud& crown, Species label, CrownClass crown_class,
                                    const AugmentOptions& opts = {});

/// Fixed input scaling applied before the network sees a representation.
struct NetworkScaling {
    static constexpr double height = 50.0;
    static constexpr double intensity = 255.0;
    static constexpr double crown_area = 300.0;
    static constexpr double tree_height = 50.0;
    static constexpr double crown_width = 20.0;
};

Dsm4 scale_for_network(const Dsm4& rep);
Views4 scale_for_network(const Views4& rep);

// Binary tensor store. Layout (all little-endian):
//   "CRWN" u16 version u32 kind u32 channels u32 height u32 width
//   per set: u32 record_count, then per record channels*height*width f32
//   (channel-major) followed by f32 crown_area, tree_height, crown_width.
struct TensorRecord {
    std::vector<float> values;
    std::array<float, 3> scalars{};  // crown_area, tree_height, crown_width
};

struct TensorStoreEntry {
    std::uint64_t offset = 0;
    std::uint32_t records = 0;
    Species label = Species::Deciduous;
    CrownClass crown_class = CrownClass::Dominant;
};

struct TensorStoreHeader {
    RepresentationKind kind = RepresentationKind::Views4;
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
};

/// Streams sets to a tensor store one crown at a time.
class TensorStoreWriter {
public:
    TensorStoreWriter(std::filesystem::path bin_path, std::filesystem::path manifest_path, RepresentationKind kind);
    void add(const RepresentationSet& set);
    void finish();

private:
    std::ofstream out_;
    std::filesystem::path manifest_path_;
    RepresentationKind kind_;
    nlohmann::ordered_json manifest_;
};

/// Writes the sets to `bin_path` and the crown_id -> offset manifest to `manifest_path`.
void write_tensor_store(const std::filesystem::path& bin_path, const std::filesystem::path& manifest_path,
                        std::span<const RepresentationSet> sets, RepresentationKind kind);

TensorStoreHeader read_tensor_header(const std::filesystem::path& bin_path);
std::map<std::string, TensorStoreEntry> read_tensor_manifest(const std::filesystem::path& manifest_path);
std::vector<TensorRecord> read_tensor_records(const std::filesystem::path& bin_path, std::uint64_t offset);

}  // namespace crownnet
