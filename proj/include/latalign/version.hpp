#ifndef LATALIGN_VERSION_HPP
#define LATALIGN_VERSION_HPP

namespace latalign {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
