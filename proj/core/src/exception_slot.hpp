#pragma once

#include <exception>
#include <mutex>

namespace sandwich::detail {

// Holds the first exception thrown inside a parallel loop body so it can be
// rethrown on the calling thread once the loop has joined.
class ExceptionSlot {
public:
    template <class F>
    void run(F&& body) noexcept {
        try {
            body();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }

    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

} // namespace sandwich::detail
