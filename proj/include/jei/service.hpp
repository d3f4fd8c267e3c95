// Copyright 2026 The JEI Surface Editing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "jei/pipeline.hpp"
#include "jei/session.hpp"

namespace httplib {
class Server;
}

namespace jei {

/// FIFO admission for one session: requests start in arrival order, readers
/// that arrive back to back run together, a writer runs alone.
class TicketLock {
public:
    void lock_shared() { acquire(false); }
    void unlock_shared();
    void lock();
    void unlock();

private:
    void acquire(bool exclusive);

    std::mutex m_;
    std::condition_variable cv_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t next_start_ = 0;
    int readers_ = 0;
    bool writer_ = false;
};

struct ServiceOptions {
    SegmentationConfig config;
    /// Seeds the session id generator.
    std::uint64_t seed = 1;
};

/// HTTP front end of the editing engine. Sessions live in memory, keyed by
/// opaque ids; see README for the routes and payloads.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void install(httplib::Server& server);

    /// Registers an existing session (e.g. one loaded from a session file).
    std::string add(Session session);

    /// Runs f on the session under its exclusive lock; throws for unknown ids.
    template <typename F>
    auto with_session(const std::string& id, F&& f) {
        auto e = find(id);
        std::lock_guard lock(e->lock);
        return f(e->session);
    }

private:
    struct Entry {
        explicit Entry(Session s) : session(std::move(s)) {}
        Session session;
        TicketLock lock;
    };
    std::shared_ptr<Entry> find(const std::string& id);
    std::string next_id();

    ServiceOptions options_;
    std::mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t id_state_ = 0;
};

/// Binds to JEI_ADDR (host:port, default 127.0.0.1:8080) and blocks.
void serve(Service& service, const std::string& address);
std::string default_address();

}  // namespace jei
