#include <spotattack/imaging.hpp>

int main() {
  using namespace spotattack;
  const Mask m = rasterize_mask(shape::Rect{5}, {10, 10}, kCharDims);
  return pixel_count(m).count == 25 ? 0 : 1;
}
