#include "vehnet/morphology.hpp"

#include <stdexcept>

namespace vehnet {

StructuringElement StructuringElement::square(int n) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("structuring element: size must be odd");
    StructuringElement se;
    se.size = n;
    se.cells.assign(static_cast<std::size_t>(n) * n, 1);
    return se;
}

void StructuringElement::validate() const {
    if (size < 1 || size % 2 == 0) throw std::invalid_argument("structuring element: size must be odd");
    if (cells.size() != static_cast<std::size_t>(size) * size) {
        throw std::invalid_argument("structuring element: cell count does not match size");
    }
    if (!cell(0, 0)) throw std::invalid_argument("structuring element: origin cell must be set");
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    se.validate();
    const int half = se.size / 2;
    const long H = static_cast<long>(mask.height), W = static_cast<long>(mask.width);
    BinaryMask out(mask.height, mask.width);
    for (long y = 0; y < H; ++y) {
        for (long x = 0; x < W; ++x) {
            bool keep = true;
            for (int dy = -half; keep && dy <= half; ++dy) {
                for (int dx = -half; dx <= half; ++dx) {
                    if (!se.cell(dy, dx)) continue;
                    const long ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= H || nx < 0 || nx >= W || !mask.set(ny, nx)) {
                        keep = false;
                        break;
                    }
                }
            }
            out.at(y, x) = keep ? 1 : 0;
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    se.validate();
    const int half = se.size / 2;
    const long H = static_cast<long>(mask.height), W = static_cast<long>(mask.width);
    BinaryMask out(mask.height, mask.width);
    for (long y = 0; y < H; ++y) {
        for (long x = 0; x < W; ++x) {
            if (!mask.set(y, x)) continue;
            for (int dy = -half; dy <= half; ++dy) {
                for (int dx = -half; dx <= half; ++dx) {
                    if (!se.cell(dy, dx)) continue;
                    const long ny = y + dy, nx = x + dx;
                    if (ny >= 0 && ny < H && nx >= 0 && nx < W) out.at(ny, nx) = 1;
                }
            }
        }
    }
    return out;
}

BinaryMask opening(const BinaryMask& mask, const StructuringElement& se) {
    return dilate(erode(mask, se), se);
}

}  // namespace vehnet
