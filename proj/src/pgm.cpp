#include "nfbm/pgm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nfbm {

namespace {

// Next whitespace-separated token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_int(std::istream& in, const std::string& path, const char* what) {
  const std::string tok = next_token(in);
  try {
    return std::stoi(tok);
  } catch (...) {
    throw io_error(path + ": bad PGM header (" + what + ")");
  }
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5")
    throw io_error(path + ": not a PGM file (magic " + magic + ")");
  const int w = parse_int(in, path, "width");
  const int h = parse_int(in, path, "height");
  const int maxval = parse_int(in, path, "maxval");
  if (w < 2 || h < 2) throw io_error(path + ": image too small");
  if (maxval < 1 || maxval > 255)
    throw io_error(path + ": unsupported maxval " + std::to_string(maxval));

  Image img(w, h);
  if (magic == "P2") {
    for (auto& v : img.px) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw io_error(path + ": truncated P2 data");
      v = std::stod(tok);
    }
  } else {
    // the single whitespace after maxval was consumed by the tokenizer
    std::vector<unsigned char> raw(img.px.size());
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw io_error(path + ": truncated P5 data");
    for (std::size_t i = 0; i < raw.size(); ++i)
      img.px[i] = static_cast<double>(raw[i]);
  }
  return img;
}

void write_pgm(const std::string& path, const Image& img, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << (binary ? "P5" : "P2") << "\n"
      << img.width << " " << img.height << "\n255\n";
  auto quantize = [](double v) {
    const double r = std::nearbyint(v);
    return static_cast<unsigned char>(std::min(255.0, std::max(0.0, r)));
  };
  if (binary) {
    std::vector<unsigned char> raw(img.px.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = quantize(img.px[i]);
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  } else {
    for (int i = 0; i < img.height; ++i) {
      for (int j = 0; j < img.width; ++j) {
        out << static_cast<int>(quantize(img.at(i, j)));
        out << (j + 1 == img.width ? '\n' : ' ');
      }
    }
  }
  if (!out) throw io_error("failed writing " + path);
}

}  // namespace nfbm
