// Writes decay-curve CSVs for the chunked, interleaved and multi-head
// allocations side by side, the comparison the library was built to make.
// Usage: decay_profiles [output_dir]

#include <cstdio>
#include <string>

#include "mmrope/mmrope.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : ".";
  const int d = 128;
  const double base = 1e6;
  const mmrope::AxisRatio ratio{24, 20, 20};
  const mmrope::FreqTable table = mmrope::base_frequencies(d, base);
  const std::vector<double> grid = mmrope::default_delta_grid();

  const auto axes = {mmrope::Axis::T, mmrope::Axis::H, mmrope::Axis::W};

  auto dump = [&](const mmrope::RotarySpec& spec, const std::string& label) {
    std::vector<mmrope::DecayCurve> curves;
    for (mmrope::Axis a : axes) curves.push_back(mmrope::decay_curve(spec, a, grid));
    const std::string path = dir + "/decay_" + label + ".csv";
    mmrope::write_text_file(path, mmrope::decay_to_csv(curves, label, ratio.to_string(), d, base));
    std::printf("wrote %s\n", path.c_str());
  };

  dump(mmrope::make_rotary_spec(table, mmrope::alloc_chunked(d, ratio)), "chunked");
  dump(mmrope::make_rotary_spec(table, mmrope::alloc_interleaved(d, ratio)), "interleaved");
  dump(mmrope::make_rotary_spec(table, mmrope::alloc_multihead(28, 4, {2, 1, 1})), "multihead");
  return 0;
}
