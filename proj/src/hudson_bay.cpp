#include "merinda/systems.hpp"

namespace merinda {

namespace {

// Annual hare and lynx pelts traded by the Hudson Bay Company, 1900-1920,
// in thousands. Widely reproduced tabulation of the company records.
constexpr double kHudsonBay[][3] = {
    {1900, 30.0, 4.0},  {1901, 47.2, 6.1},  {1902, 70.2, 9.8},  {1903, 77.4, 35.2},
    {1904, 36.3, 59.4}, {1905, 20.6, 41.7}, {1906, 18.1, 19.0}, {1907, 21.4, 13.0},
    {1908, 22.0, 8.3},  {1909, 25.4, 9.1},  {1910, 27.1, 7.4},  {1911, 40.3, 8.0},
    {1912, 57.0, 12.3}, {1913, 76.6, 19.5}, {1914, 52.3, 45.7}, {1915, 19.5, 51.1},
    {1916, 11.2, 29.7}, {1917, 7.6, 15.8},  {1918, 14.6, 9.7},  {1919, 16.2, 10.1},
    {1920, 24.7, 8.6},
};

}  // namespace

Trajectory hudson_bay_dataset() {
    constexpr Eigen::Index count = static_cast<Eigen::Index>(std::size(kHudsonBay));
    Trajectory traj;
    traj.times.resize(count);
    traj.states.resize(count, 2);
    traj.inputs.resize(count, 0);
    for (Eigen::Index i = 0; i < count; ++i) {
        traj.times(i) = kHudsonBay[i][0];
        traj.states(i, 0) = kHudsonBay[i][1];
        traj.states(i, 1) = kHudsonBay[i][2];
    }
    return traj;
}

}  // namespace merinda
