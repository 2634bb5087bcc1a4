// Renders a scene with the reference sheet and one elliptical wound, then measures it.

#include <cstdio>

#include "woundambit/woundambit.hpp"

int main() {
  using namespace woundambit;
  const ReferenceSheet sheet(ReferenceLayout::default_layout(), builtin_dictionary());
  const Ellipse wound{{0, 0}, 60.0, 25.0, 0.4};
  const auto spec = standard_scene(5.0, -0.2, wound, sheet);
  const auto photo = render_scene(spec, sheet);
  const auto mask = rasterize_ellipses(spec.width, spec.height, spec.wounds);

  const auto r = run_measurement(photo, mask);
  std::printf("markers: %zu, scale %.3f px/mm (%s), truth 5.000\n", r.markers.size(),
              r.scale.px_per_mm, to_string(r.scale.method));
  for (const auto& w : r.measurements.wounds) {
    std::printf("wound: height %.2f mm, width %.2f mm, area %.1f mm^2\n", w.height_mm, w.width_mm,
                w.area_mm2);
  }
  std::printf("truth: height %.2f mm, width %.2f mm, area %.1f mm^2\n", 2 * wound.semi_major / 5.0,
              2 * wound.semi_minor / 5.0, wound.area() / 25.0);
}
