#include <stdexcept>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dynapool/depth_io.hpp"
#include "dynapool/errors.hpp"

namespace fs = std::filesystem;

namespace dynapool {

std::string_view to_string(ImageKind kind) {
  switch (kind) {
    case ImageKind::ddi: return "ddi";
    case ImageKind::ddni: return "ddni";
    case ImageKind::ddmni: return "ddmni";
  }
  return "unknown";
}

std::string_view to_string(Direction direction) {
  return direction == Direction::forward ? "forward" : "backward";
}

ImageKind parse_kind(std::string_view text) {
  for (ImageKind k : kAllKinds) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown image kind '" + std::string(text) + "'");
}

Direction parse_direction(std::string_view text) {
  for (Direction d : kAllDirections) {
    if (to_string(d) == text) return d;
  }
  throw std::invalid_argument("unknown direction '" + std::string(text) + "'");
}

std::string image_filename(std::string_view sequence_id, ImageKind kind, Direction direction) {
  std::string name(sequence_id);
  name += '_';
  name += to_string(kind);
  name += '_';
  name += to_string(direction);
  name += ".png";
  return name;
}

void save_image(const DynamicImage& image, const fs::path& path) {
  const std::size_t n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  if (image.width < 1 || image.height < 1) throw std::invalid_argument("empty dynamic image");
  for (const auto& ch : image.channels) {
    if (ch.size() != n) throw std::invalid_argument("dynamic image channel size mismatch");
  }
  // OpenCV stores BGR, so channel 0 goes last to land in the PNG's red plane.
  cv::Mat img(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * image.width + x;
      row[x] = cv::Vec3b(image.channels[2][i], image.channels[1][i], image.channels[0][i]);
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write image", path);
}

DynamicImage load_image(const fs::path& path) {
  const std::string stem = path.stem().string();
  const auto last = stem.rfind('_');
  const auto prev = last == std::string::npos || last == 0 ? std::string::npos : stem.rfind('_', last - 1);
  if (prev == std::string::npos || path.extension() != ".png") {
    throw FormatError("dynamic image filename lacks _<kind>_<direction>.png suffix", path);
  }
  DynamicImage image;
  try {
    image.kind = parse_kind(stem.substr(prev + 1, last - prev - 1));
    image.direction = parse_direction(stem.substr(last + 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), path);
  }

  cv::Mat img;
  try {
    img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    img.release();
  }
  if (img.empty()) throw FormatError("not a readable PNG", path);
  if (img.type() != CV_8UC3) throw FormatError("dynamic image must be 8-bit 3-channel", path);

  image.width = img.cols;
  image.height = img.rows;
  const std::size_t n = static_cast<std::size_t>(img.cols) * img.rows;
  for (auto& ch : image.channels) ch.resize(n);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.cols; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.cols + x;
      image.channels[0][i] = row[x][2];
      image.channels[1][i] = row[x][1];
      image.channels[2][i] = row[x][0];
    }
  }
  return image;
}

}  // namespace dynapool
