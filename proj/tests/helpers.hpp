#pragma once

#include <doctest.h>

#include <string>
#include <utility>

#include "bisimet/errors.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(BISIMET_DATA_DIR) + "/" + name;
}

/// Runs `fn`, requires that it throws bisimet::Error, and returns the error
/// so callers can check kind and message.
template <typename Fn>
bisimet::Error capture_error(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const bisimet::Error& e) {
        return e;
    }
    FAIL("expected bisimet::Error, nothing was thrown");
    return bisimet::Error(bisimet::ErrorKind::io_failure, "unreachable");
}

template <typename Fn>
void check_kind(Fn&& fn, bisimet::ErrorKind want) {
    const bisimet::Error e = capture_error(std::forward<Fn>(fn));
    CHECK(e.kind() == want);
}

}  // namespace testutil
