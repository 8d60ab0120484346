#include "vehnet/io/png.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace vehnet::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("png '" + path + "': " + what);
}

class PngReader {
public:
    explicit PngReader(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "rb")) {
        if (!file_) fail(path_, "cannot open");
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info_ = png_ ? png_create_info_struct(png_) : nullptr;
        if (!png_ || !info_) fail(path_, "libpng init failed");
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }

    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    png_structp png() { return png_; }
    png_infop info() { return info_; }

    void start() {
        if (setjmp(png_jmpbuf(png_))) fail(path_, "decode error (truncated or corrupt)");
        png_init_io(png_, file_.get());
        png_read_info(png_, info_);
    }

private:
    std::string path_;
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngWriter {
public:
    explicit PngWriter(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) fail(path_, "cannot open for writing");
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info_ = png_ ? png_create_info_struct(png_) : nullptr;
        if (!png_ || !info_) fail(path_, "libpng init failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png_, &info_); }

    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;

    void write(std::size_t height, std::size_t width, int bit_depth, int color_type,
               std::vector<png_bytep>& rows) {
        if (setjmp(png_jmpbuf(png_))) fail(path_, "encode error");
        png_init_io(png_, file_.get());
        png_set_IHDR(png_, info_, static_cast<png_uint_32>(width),
                     static_cast<png_uint_32>(height), bit_depth, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png_, info_);
        if (bit_depth == 16) png_set_swap(png_);  // buffers are little-endian
        png_write_image(png_, rows.data());
        png_write_end(png_, nullptr);
    }

private:
    std::string path_;
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

}  // namespace

ImageU8 read_png_rgb8(const std::string& path) {
    PngReader reader(path);
    reader.start();
    if (setjmp(png_jmpbuf(reader.png()))) fail(path, "decode error (truncated or corrupt)");

    png_structp png = reader.png();
    png_infop info = reader.info();
    png_set_expand(png);
    png_set_strip_alpha(png);
    png_set_strip_16(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    const std::size_t h = png_get_image_height(png, info);
    const std::size_t w = png_get_image_width(png, info);
    if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8) {
        fail(path, "unsupported format after expansion");
    }
    ImageU8 image(h, w, 3);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = image.pixels.data() + y * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return image;
}

ImageU8 read_png_gray8(const std::string& path) {
    PngReader reader(path);
    reader.start();
    if (setjmp(png_jmpbuf(reader.png()))) fail(path, "decode error (truncated or corrupt)");

    png_structp png = reader.png();
    png_infop info = reader.info();
    png_set_expand(png);
    png_set_strip_alpha(png);
    png_set_strip_16(png);
    if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(png, 1, -1, -1);
    png_read_update_info(png, info);

    const std::size_t h = png_get_image_height(png, info);
    const std::size_t w = png_get_image_width(png, info);
    if (png_get_channels(png, info) != 1 || png_get_bit_depth(png, info) != 8) {
        fail(path, "unsupported format after expansion");
    }
    ImageU8 image(h, w, 1);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = image.pixels.data() + y * w;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return image;
}

ImageU16 read_png_gray16(const std::string& path) {
    PngReader reader(path);
    reader.start();
    if (setjmp(png_jmpbuf(reader.png()))) fail(path, "decode error (truncated or corrupt)");

    png_structp png = reader.png();
    png_infop info = reader.info();
    if (png_get_bit_depth(png, info) != 16 ||
        png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
        fail(path, "expected 16-bit grayscale");
    }
    png_set_swap(png);  // file is big-endian, buffer little-endian
    png_read_update_info(png, info);

    ImageU16 image;
    image.height = png_get_image_height(png, info);
    image.width = png_get_image_width(png, info);
    image.pixels.assign(image.height * image.width, 0);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(image.pixels.data() + y * image.width);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return image;
}

void write_png_rgb8(const std::string& path, const ImageU8& image) {
    if (image.channels != 3) fail(path, "write_png_rgb8 needs a 3-channel image");
    PngWriter writer(path);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        rows[y] = const_cast<png_bytep>(image.pixels.data() + y * image.width * 3);
    }
    writer.write(image.height, image.width, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_png_gray8(const std::string& path, const ImageU8& image) {
    if (image.channels != 1) fail(path, "write_png_gray8 needs a 1-channel image");
    PngWriter writer(path);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        rows[y] = const_cast<png_bytep>(image.pixels.data() + y * image.width);
    }
    writer.write(image.height, image.width, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_gray16(const std::string& path, const ImageU16& image) {
    PngWriter writer(path);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(
            const_cast<std::uint16_t*>(image.pixels.data() + y * image.width));
    }
    writer.write(image.height, image.width, 16, PNG_COLOR_TYPE_GRAY, rows);
}

}  // namespace vehnet::io
