#include "vehnet/objects.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vehnet {

BinaryMask class_mask(const SemanticMap& map, const std::string& class_name) {
    const int k = map.class_index(class_name);
    if (k < 0) throw std::invalid_argument("class_mask: unknown class '" + class_name + "'");
    const LabelMap argmax = map.argmax();
    BinaryMask out(map.height, map.width);
    for (std::size_t i = 0; i < argmax.labels.size(); ++i)
        out.bits[i] = (argmax.labels[i] == static_cast<std::uint8_t>(k)) ? 1 : 0;
    return out;
}

namespace {

struct UnionFind {
    std::vector<std::int32_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int32_t find(std::int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a;  // keep the smaller root: first raster pixel wins
        else parent[a] = b;
    }
};

}  // namespace

std::vector<ObjectInstance> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        throw std::invalid_argument("connected_components: connectivity must be 4 or 8, got " +
                                    std::to_string(connectivity));
    }
    const std::size_t H = mask.height, W = mask.width;
    UnionFind uf(H * W);

    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
            if (!mask.set(y, x)) continue;
            const std::int32_t here = static_cast<std::int32_t>(y * W + x);
            if (x > 0 && mask.set(y, x - 1)) uf.unite(here, here - 1);
            if (y > 0) {
                if (mask.set(y - 1, x)) uf.unite(here, static_cast<std::int32_t>((y - 1) * W + x));
                if (connectivity == 8) {
                    if (x > 0 && mask.set(y - 1, x - 1))
                        uf.unite(here, static_cast<std::int32_t>((y - 1) * W + x - 1));
                    if (x + 1 < W && mask.set(y - 1, x + 1))
                        uf.unite(here, static_cast<std::int32_t>((y - 1) * W + x + 1));
                }
            }
        }
    }

    // roots appear in raster order, so component ids follow first-pixel order
    std::vector<std::int32_t> root_to_id(H * W, -1);
    std::vector<ObjectInstance> instances;
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
            if (!mask.set(y, x)) continue;
            const std::int32_t root = uf.find(static_cast<std::int32_t>(y * W + x));
            std::int32_t id = root_to_id[root];
            if (id < 0) {
                id = static_cast<std::int32_t>(instances.size());
                root_to_id[root] = id;
                ObjectInstance inst;
                inst.id = id;
                inst.bbox_x0 = inst.bbox_x1 = static_cast<int>(x);
                inst.bbox_y0 = inst.bbox_y1 = static_cast<int>(y);
                instances.push_back(std::move(inst));
            }
            ObjectInstance& inst = instances[id];
            inst.pixels.push_back({static_cast<int>(x), static_cast<int>(y)});
            inst.bbox_x0 = std::min(inst.bbox_x0, static_cast<int>(x));
            inst.bbox_x1 = std::max(inst.bbox_x1, static_cast<int>(x));
            inst.bbox_y0 = std::min(inst.bbox_y0, static_cast<int>(y));
            inst.bbox_y1 = std::max(inst.bbox_y1, static_cast<int>(y));
        }
    }
    for (ObjectInstance& inst : instances) {
        inst.area = static_cast<int>(inst.pixels.size());
        double sx = 0.0, sy = 0.0;
        for (const PixelCoord& p : inst.pixels) {
            sx += p.x;
            sy += p.y;
        }
        inst.centroid_x = sx / inst.area;
        inst.centroid_y = sy / inst.area;
    }
    return instances;
}

std::vector<ObjectInstance> filter_small(std::vector<ObjectInstance> instances, int min_area) {
    if (min_area < 1) throw std::invalid_argument("filter_small: min_area must be >= 1");
    std::erase_if(instances, [min_area](const ObjectInstance& i) { return i.area < min_area; });
    return instances;
}

ObjectPatch extract_patch(const ImageU8& image, const ObjectInstance& instance, int context) {
    if (context < 0) throw std::invalid_argument("extract_patch: context must be >= 0");
    if (instance.bbox_x1 < instance.bbox_x0 || instance.bbox_y1 < instance.bbox_y0) {
        throw std::invalid_argument("extract_patch: degenerate bounding box");
    }
    if (instance.bbox_x0 < 0 || instance.bbox_y0 < 0 ||
        instance.bbox_x1 >= static_cast<int>(image.width) ||
        instance.bbox_y1 >= static_cast<int>(image.height)) {
        throw std::invalid_argument("extract_patch: bounding box leaves the image");
    }
    ObjectPatch patch;
    patch.src_x0 = std::max(0, instance.bbox_x0 - context);
    patch.src_y0 = std::max(0, instance.bbox_y0 - context);
    patch.src_x1 = std::min(static_cast<int>(image.width) - 1, instance.bbox_x1 + context);
    patch.src_y1 = std::min(static_cast<int>(image.height) - 1, instance.bbox_y1 + context);
    patch.pixels = ImageU8(patch.src_y1 - patch.src_y0 + 1, patch.src_x1 - patch.src_x0 + 1,
                           image.channels);
    for (std::size_t y = 0; y < patch.pixels.height; ++y) {
        const std::uint8_t* src =
            &image.pixels[((patch.src_y0 + y) * image.width + patch.src_x0) * image.channels];
        std::copy(src, src + patch.pixels.width * image.channels,
                  &patch.pixels.pixels[y * patch.pixels.width * image.channels]);
    }
    return patch;
}

std::vector<std::pair<ObjectInstance, ObjectPatch>> extract_objects(const SemanticMap& map,
                                                                    const ImageU8& image,
                                                                    const ExtractParams& params) {
    if (map.height != image.height || map.width != image.width) {
        throw std::invalid_argument("extract_objects: map and image sizes differ");
    }
    const BinaryMask mask = opening(class_mask(map, params.class_name), params.se);
    std::vector<ObjectInstance> instances =
        filter_small(connected_components(mask, params.connectivity), params.min_area);
    std::vector<std::pair<ObjectInstance, ObjectPatch>> out;
    out.reserve(instances.size());
    for (ObjectInstance& inst : instances) {
        ObjectPatch patch = extract_patch(image, inst, params.context);
        out.emplace_back(std::move(inst), std::move(patch));
    }
    return out;
}

}  // namespace vehnet
