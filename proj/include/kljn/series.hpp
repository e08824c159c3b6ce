#pragma once

#include <Eigen/Core>

namespace kljn {

// Sample series over one KLJN-clock period. All per-sample signal math
// (generator voltages, channel observables, reduced noises) runs on these
// as elementwise array expressions.
using Series = Eigen::ArrayXd;
using SeriesRef = Eigen::Ref<const Series>;

} // namespace kljn
