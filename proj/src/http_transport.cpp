#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "domscreen/enrichment.hpp"
#include "domscreen/errors.hpp"

namespace domscreen {

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::get(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("URL without scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const auto res = client.Get(path);
    if (!res) throw RetryableError("http", "GET " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

}  // namespace domscreen
