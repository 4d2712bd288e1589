#include "wbb/machine.hpp"

#include <cctype>
#include <cstdio>

namespace wbb {

std::string value_text(const ParamValue& v)
{
    if (const auto* n = std::get_if<unsigned>(&v))
        return std::to_string(*n);
    return std::get<Message>(v).text();
}

std::strong_ordering compare_values(const ParamValue& a, const ParamValue& b)
{
    if (a.index() != b.index())
        return a.index() <=> b.index();
    if (const auto* n = std::get_if<unsigned>(&a))
        return *n <=> std::get<unsigned>(b);
    return std::get<Message>(a) <=> std::get<Message>(b);
}

Binding& Binding::set(std::string name, ParamValue value)
{
    for (auto& p : params_)
        if (p.name == name) {
            p.value = std::move(value);
            return *this;
        }
    params_.push_back({std::move(name), std::move(value)});
    return *this;
}

const ParamValue* Binding::find(std::string_view name) const
{
    for (const auto& p : params_)
        if (p.name == name)
            return &p.value;
    return nullptr;
}

unsigned Binding::nat(std::string_view name) const
{
    const ParamValue* v = find(name);
    if (!v || !std::holds_alternative<unsigned>(*v))
        throw StepRejected("binding lacks natural parameter '" + std::string(name) + "'");
    return std::get<unsigned>(*v);
}

Message Binding::msg(std::string_view name) const
{
    const ParamValue* v = find(name);
    if (!v || !std::holds_alternative<Message>(*v))
        throw StepRejected("binding lacks message parameter '" + std::string(name) + "'");
    return std::get<Message>(*v);
}

std::string Binding::text() const
{
    std::string s;
    for (const auto& p : params_) {
        if (!s.empty())
            s += ' ';
        s += p.name + '=' + value_text(p.value);
    }
    return s;
}

std::strong_ordering operator<=>(const Binding& a, const Binding& b)
{
    std::size_t n = std::min(a.params_.size(), b.params_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = a.params_[i].name <=> b.params_[i].name; c != 0)
            return c;
        if (auto c = compare_values(a.params_[i].value, b.params_[i].value); c != 0)
            return c;
    }
    return a.params_.size() <=> b.params_.size();
}

namespace {

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

void skip_ws(std::string_view s, std::size_t& pos)
{
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
        ++pos;
}

// Parses `name=value` pairs until end of input or the `->` marker.
Binding parse_params(std::string_view text, std::size_t& pos, std::size_t line_no)
{
    Binding b;
    for (;;) {
        skip_ws(text, pos);
        if (pos >= text.size() || text.substr(pos, 2) == "->")
            return b;
        std::size_t start = pos;
        while (pos < text.size() && name_char(text[pos]))
            ++pos;
        if (start == pos || pos >= text.size() || text[pos] != '=')
            throw ParseError("line " + std::to_string(line_no) + ": expected <name>=<value> at column " +
                                 std::to_string(start + 1),
                             line_no, start + 1);
        std::string name(text.substr(start, pos - start));
        ++pos;
        if (b.find(name))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate parameter '" + name + "'",
                             line_no, start + 1);
        if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            std::size_t vstart = pos;
            unsigned long v = 0;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                v = v * 10 + static_cast<unsigned>(text[pos] - '0');
                if (v > 1'000'000)
                    throw ParseError("line " + std::to_string(line_no) + ": number out of range", line_no,
                                     vstart + 1);
                ++pos;
            }
            b.set(std::move(name), static_cast<unsigned>(v));
        } else {
            try {
                b.set(std::move(name), parse_message_prefix(text, pos));
            } catch (const ParseError& e) {
                throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no, e.column());
            }
        }
    }
}

}  // namespace

Binding parse_binding(std::string_view text)
{
    std::size_t pos = 0;
    Binding b = parse_params(text, pos, 1);
    skip_ws(text, pos);
    if (pos != text.size())
        throw ParseError("trailing input in binding at column " + std::to_string(pos + 1), 1, pos + 1);
    return b;
}

std::uint64_t fingerprint(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fingerprint_hex(std::uint64_t fp)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

std::string format_step(const Step& step)
{
    std::string s = step.event;
    if (!step.binding.empty())
        s += ' ' + step.binding.text();
    if (step.post)
        s += " -> " + fingerprint_hex(*step.post);
    return s;
}

Step parse_step(std::string_view line, std::size_t line_no)
{
    std::size_t pos = 0;
    skip_ws(line, pos);
    std::size_t start = pos;
    while (pos < line.size() && name_char(line[pos]))
        ++pos;
    if (start == pos)
        throw ParseError("line " + std::to_string(line_no) + ": expected event name", line_no, start + 1);
    Step st;
    st.event = std::string(line.substr(start, pos - start));
    st.binding = parse_params(line, pos, line_no);
    skip_ws(line, pos);
    if (pos < line.size()) {
        // "-> <16 hex digits>"
        pos += 2;
        skip_ws(line, pos);
        std::string_view hex = line.substr(pos);
        while (!hex.empty() && (hex.back() == ' ' || hex.back() == '\t' || hex.back() == '\r'))
            hex.remove_suffix(1);
        if (hex.size() != 16 || !std::all_of(hex.begin(), hex.end(), [](char c) {
                return std::isxdigit(static_cast<unsigned char>(c)) && !std::isupper(static_cast<unsigned char>(c));
            }))
            throw ParseError("line " + std::to_string(line_no) + ": expected 16 lowercase hex digits after '->'",
                             line_no, pos + 1);
        st.post = std::stoull(std::string(hex), nullptr, 16);
    }
    return st;
}

RawTrace parse_trace_text(std::string_view text)
{
    RawTrace raw;
    bool header = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        std::size_t pos = 0;
        skip_ws(line, pos);
        if (pos == line.size() || line[pos] == '#')
            continue;
        line = line.substr(pos);
        if (!header) {
            constexpr std::string_view magic = "wbb-trace 1 machine=";
            if (!line.starts_with(magic) || line.size() == magic.size())
                throw ParseError("line " + std::to_string(line_no) + ": expected header 'wbb-trace 1 machine=<name>'",
                                 line_no, 1);
            raw.machine = std::string(line.substr(magic.size()));
            header = true;
            continue;
        }
        if (line[0] == '@') {
            if (!raw.steps.empty())
                throw ParseError("line " + std::to_string(line_no) + ": directives must precede steps", line_no, 1);
            std::string_view d = line.substr(1);
            std::size_t dp = 0;
            skip_ws(d, dp);
            raw.directives.emplace_back(d.substr(dp));
            continue;
        }
        raw.steps.push_back(parse_step(line, line_no));
    }
    if (!header)
        throw ParseError("empty trace: missing header", line_no, 1);
    return raw;
}

}  // namespace wbb
