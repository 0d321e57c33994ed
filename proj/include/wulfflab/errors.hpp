#pragma once

#include <stdexcept>
#include <string>

namespace wulfflab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WULFFLAB_DEFINE_ERROR(Name)                                   \
    struct Name : Error {                                             \
        explicit Name(const std::string& msg) : Error(msg) {}         \
    }

WULFFLAB_DEFINE_ERROR(ZeroVector);
WULFFLAB_DEFINE_ERROR(DegeneratePolygon);
WULFFLAB_DEFINE_ERROR(EmptyTarget);
WULFFLAB_DEFINE_ERROR(EpsilonUnresolvable);
WULFFLAB_DEFINE_ERROR(InfeasibleDual);
WULFFLAB_DEFINE_ERROR(EmptyLevelSet);
WULFFLAB_DEFINE_ERROR(NonConvergence);
WULFFLAB_DEFINE_ERROR(TooLarge);
WULFFLAB_DEFINE_ERROR(NotConvex);
WULFFLAB_DEFINE_ERROR(BisectionFailure);
WULFFLAB_DEFINE_ERROR(NoRoomForPair);
WULFFLAB_DEFINE_ERROR(NotDisjoint);
WULFFLAB_DEFINE_ERROR(BadExponent);
WULFFLAB_DEFINE_ERROR(BadT);
WULFFLAB_DEFINE_ERROR(InvalidP);
WULFFLAB_DEFINE_ERROR(ConfigError);

#undef WULFFLAB_DEFINE_ERROR

}  // namespace wulfflab
