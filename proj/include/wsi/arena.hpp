#pragma once

#include <cstddef>
#include <memory_resource>

namespace wsi {

// Counts bytes handed to the pool by its upstream (the resident footprint).
class CountingUpstream : public std::pmr::memory_resource {
public:
    std::size_t reserved_bytes() const noexcept { return reserved_; }
    std::size_t peak_reserved_bytes() const noexcept { return peak_reserved_; }

private:
    void* do_allocate(std::size_t bytes, std::size_t alignment) override;
    void do_deallocate(void* p, std::size_t bytes, std::size_t alignment) override;
    bool do_is_equal(const std::pmr::memory_resource& other) const noexcept override {
        return this == &other;
    }

    std::size_t reserved_ = 0;
    std::size_t peak_reserved_ = 0;
};

// Activation arena for one inference session. Freed blocks return to a pool
// and are reused by later allocations; live and peak byte counts cover what
// the kernels actually requested.
//
// Not thread-safe: one arena per session, one session per thread.
class Arena : public std::pmr::memory_resource {
public:
    Arena();
    Arena(const Arena&) = delete;
    Arena& operator=(const Arena&) = delete;

    std::size_t live_bytes() const noexcept { return live_; }
    std::size_t peak_live_bytes() const noexcept { return peak_; }
    std::size_t reserved_bytes() const noexcept { return upstream_.reserved_bytes(); }
    std::size_t allocation_count() const noexcept { return allocations_; }

    // Starts a new high-water measurement from the current live size.
    void reset_peak() noexcept { peak_ = live_; }

private:
    void* do_allocate(std::size_t bytes, std::size_t alignment) override;
    void do_deallocate(void* p, std::size_t bytes, std::size_t alignment) override;
    bool do_is_equal(const std::pmr::memory_resource& other) const noexcept override {
        return this == &other;
    }

    CountingUpstream upstream_;
    std::pmr::unsynchronized_pool_resource pool_;
    std::size_t live_ = 0;
    std::size_t peak_ = 0;
    std::size_t allocations_ = 0;
};

// Resource used for new tensor storage on the calling thread.
std::pmr::memory_resource* current_resource() noexcept;

// Routes tensor allocations on this thread into an arena until destroyed.
class ArenaScope {
public:
    explicit ArenaScope(std::pmr::memory_resource& resource) noexcept;
    ~ArenaScope();
    ArenaScope(const ArenaScope&) = delete;
    ArenaScope& operator=(const ArenaScope&) = delete;

private:
    std::pmr::memory_resource* previous_;
};

}  // namespace wsi
