#pragma once

#include "ssm/types.hpp"

#include <exception>
#include <mutex>

namespace ssm::detail {

/// Runs body(j) for j = 0..N-1, across OpenMP threads unless exec is Serial.
/// The first exception thrown by any replicate is rethrown after the loop.
template <class Body>
void for_replicates(Eigen::Index N, Execution exec, Body&& body) {
    if (exec == Execution::Serial) {
        for (Eigen::Index j = 0; j < N; ++j) body(j);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index j = 0; j < N; ++j) {
        try {
            body(j);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

} // namespace ssm::detail
