#include "pidstats/uri.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstring>

namespace pidstats {

namespace {

bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

bool is_unreserved(unsigned char c) {
    return is_alpha(char(c)) || is_digit(char(c)) || c == '-' || c == '.' || c == '_' || c == '~';
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !is_alpha(s[0]))
        return false;
    for (char c : s)
        if (!is_alpha(c) && !is_digit(c) && c != '+' && c != '-' && c != '.')
            return false;
    return true;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// space, tab, CR, LF, FF plus NBSP (UTF-8 C2 A0); Common Crawl link strings
// carry these mid-URI
std::string strip_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f')
            continue;
        if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) {
            ++i;
            continue;
        }
        out += char(c);
    }
    return out;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out += char(cp);
    } else if (cp < 0x800) {
        out += char(0xC0 | (cp >> 6));
        out += char(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += char(0xE0 | (cp >> 12));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
    } else {
        out += char(0xF0 | (cp >> 18));
        out += char(0x80 | ((cp >> 12) & 0x3F));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
    }
}

// Named set {amp, lt, gt, quot, apos} plus numeric references. Returns the
// input unchanged when nothing decodable is present.
std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out += s[i++];
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        if (name == "amp") {
            out += '&';
        } else if (name == "lt") {
            out += '<';
        } else if (name == "gt") {
            out += '>';
        } else if (name == "quot") {
            out += '"';
        } else if (name == "apos") {
            out += '\'';
        } else if (name.size() >= 2 && name[0] == '#') {
            uint32_t cp = 0;
            bool ok;
            if (name[1] == 'x' || name[1] == 'X') {
                auto [p, ec] = std::from_chars(name.data() + 2, name.data() + name.size(), cp, 16);
                ok = ec == std::errc() && p == name.data() + name.size() && name.size() > 2;
            } else {
                auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), cp, 10);
                ok = ec == std::errc() && p == name.data() + name.size();
            }
            if (!ok || cp == 0 || cp > 0x10FFFF) {
                out += s[i++];
                continue;
            }
            append_utf8(out, cp);
        } else {
            out += s[i++];
            continue;
        }
        i = semi + 1;
    }
    return out;
}

enum class DecodeMode { Unreserved, Component, Host };

int hex_val(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

bool decode_allowed(unsigned char c, DecodeMode mode) {
    if (is_unreserved(c))
        return true;
    if (mode == DecodeMode::Unreserved)
        return false;
    // never resurrect separators, escapes or whitespace: the result must
    // reparse to the same components
    if (c <= 0x20 || c == 0x7F || c >= 0x80 || c == '%' || c == '#' || c == '?')
        return false;
    if (mode == DecodeMode::Host && (c == '/' || c == ':' || c == '@' || c == '[' || c == ']'))
        return false;
    return true;
}

// Single-pass percent decoding; escapes that stay encoded get uppercase hex
// so spellings still compare equal.
std::string pct_decode(std::string_view s, DecodeMode mode) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex_val(s[i + 1]);
            int lo = hex_val(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                unsigned char c = static_cast<unsigned char>((hi << 4) | lo);
                if (decode_allowed(c, mode)) {
                    out += char(c);
                } else {
                    out += '%';
                    out += char(std::toupper(static_cast<unsigned char>(s[i + 1])));
                    out += char(std::toupper(static_cast<unsigned char>(s[i + 2])));
                }
                i += 3;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

struct Parsed {
    std::optional<std::string> scheme, host;
    std::optional<uint16_t> port;
    std::string path;
    std::optional<std::string> query, fragment;
};

Parsed parse_once(std::string_view s, const HostPredicate& resolver_hosts) {
    Parsed p;
    std::string_view rest = s;

    size_t special = rest.find_first_of(":/?#");
    if (special != std::string_view::npos && rest[special] == ':' &&
        valid_scheme(rest.substr(0, special))) {
        p.scheme = to_lower(rest.substr(0, special));
        rest = rest.substr(special + 1);
    }

    if (rest.size() >= 2 && rest[0] == '/' && rest[1] == '/') {
        rest = rest.substr(2);
        size_t end = rest.find_first_of("/?#");
        std::string_view authority = rest.substr(0, end);
        rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);

        size_t at = authority.rfind('@');
        if (at != std::string_view::npos)
            authority = authority.substr(at + 1);  // userinfo dropped

        size_t colon = authority.rfind(':');
        if (colon != std::string_view::npos) {
            std::string_view digits = authority.substr(colon + 1);
            uint32_t port = 0;
            bool ok = !digits.empty();
            for (char c : digits)
                if (!is_digit(c)) {
                    ok = false;
                    break;
                }
            if (ok) {
                auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
                ok = ec == std::errc() && port <= 65535;
            }
            if (ok) {
                p.port = uint16_t(port);
                authority = authority.substr(0, colon);
            }
        }
        if (!authority.empty())
            p.host = to_lower(pct_decode(to_lower(authority), DecodeMode::Host));
    }

    size_t hash = rest.find('#');
    if (hash != std::string_view::npos) {
        p.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }
    size_t qmark = rest.find('?');
    if (qmark != std::string_view::npos) {
        p.query = std::string(rest.substr(qmark + 1));
        rest = rest.substr(0, qmark);
    }
    p.path = std::string(rest);

    // full decoding inside resolver URIs and original PID forms makes all
    // spellings of one PID compare equal
    bool aggressive = (p.scheme && (*p.scheme == "doi" || *p.scheme == "info")) ||
                      (p.host && resolver_hosts && resolver_hosts(*p.host));
    DecodeMode mode = aggressive ? DecodeMode::Component : DecodeMode::Unreserved;
    p.path = pct_decode(p.path, mode);
    if (p.query)
        p.query = pct_decode(*p.query, mode);
    if (p.fragment)
        p.fragment = pct_decode(*p.fragment, DecodeMode::Unreserved);
    return p;
}

std::string recompose_parts(const Parsed& p) {
    std::string out;
    if (p.scheme) {
        out += *p.scheme;
        out += ':';
    }
    if (p.host) {
        out += "//";
        out += *p.host;
        if (p.port) {
            out += ':';
            out += std::to_string(*p.port);
        }
    }
    out += p.path;
    if (p.query) {
        out += '?';
        out += *p.query;
    }
    if (p.fragment) {
        out += '#';
        out += *p.fragment;
    }
    return out;
}

}  // namespace

NormalizedUri normalize(std::string_view raw, const HostPredicate& resolver_hosts) {
    // Iterate clean+parse+recompose to a fixpoint so that normalization is
    // idempotent even when decoding uncovers further encoded layers
    // (e.g. "&amp;#47;" or "%26amp%3B").
    std::string current(raw);
    Parsed parsed;
    for (int round = 0; round < 6; ++round) {
        std::string cleaned = strip_whitespace(current);
        for (int pass = 0; pass < 8; ++pass) {
            std::string decoded = strip_whitespace(decode_entities(cleaned));
            if (decoded == cleaned)
                break;
            cleaned = std::move(decoded);
        }
        parsed = parse_once(cleaned, resolver_hosts);
        std::string next = recompose_parts(parsed);
        if (next == current)
            break;
        current = std::move(next);
    }

    NormalizedUri uri;
    uri.scheme = std::move(parsed.scheme);
    uri.host = std::move(parsed.host);
    uri.port = parsed.port;
    uri.path = std::move(parsed.path);
    uri.query = std::move(parsed.query);
    uri.fragment = std::move(parsed.fragment);
    uri.had_scheme = uri.scheme.has_value();
    uri.raw = std::string(raw);
    uri.degenerate = !raw.empty() && !uri.scheme && !uri.host && uri.path.empty() && !uri.query &&
                     !uri.fragment;
    return uri;
}

std::string scheme_of(const NormalizedUri& uri) {
    return uri.scheme ? *uri.scheme : std::string("(none)");
}

std::string recompose(const NormalizedUri& uri) {
    Parsed p;
    p.scheme = uri.scheme;
    p.host = uri.host;
    p.port = uri.port;
    p.path = uri.path;
    p.query = uri.query;
    p.fragment = uri.fragment;
    return recompose_parts(p);
}

}  // namespace pidstats
