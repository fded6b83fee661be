#include "wsi/arena.hpp"

#include <algorithm>

namespace wsi {

namespace {
thread_local std::pmr::memory_resource* g_current = nullptr;
}

void* CountingUpstream::do_allocate(std::size_t bytes, std::size_t alignment) {
    void* p = std::pmr::new_delete_resource()->allocate(bytes, alignment);
    reserved_ += bytes;
    peak_reserved_ = std::max(peak_reserved_, reserved_);
    return p;
}

void CountingUpstream::do_deallocate(void* p, std::size_t bytes, std::size_t alignment) {
    std::pmr::new_delete_resource()->deallocate(p, bytes, alignment);
    reserved_ -= bytes;
}

Arena::Arena()
    : pool_(std::pmr::pool_options{0, std::size_t{1} << 26}, &upstream_) {}

void* Arena::do_allocate(std::size_t bytes, std::size_t alignment) {
    void* p = pool_.allocate(bytes, alignment);
    live_ += bytes;
    ++allocations_;
    peak_ = std::max(peak_, live_);
    return p;
}

void Arena::do_deallocate(void* p, std::size_t bytes, std::size_t alignment) {
    pool_.deallocate(p, bytes, alignment);
    live_ -= bytes;
}

std::pmr::memory_resource* current_resource() noexcept {
    return g_current != nullptr ? g_current : std::pmr::new_delete_resource();
}

ArenaScope::ArenaScope(std::pmr::memory_resource& resource) noexcept : previous_(g_current) {
    g_current = &resource;
}

ArenaScope::~ArenaScope() { g_current = previous_; }

}  // namespace wsi
