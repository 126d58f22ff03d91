#include "camfuse/json_out.hpp"

#include <cmath>
#include <cstdio>

#include "camfuse/errors.hpp"

namespace camfuse {

std::string format_double_17(double v) {
    if (!std::isfinite(v)) throw ValueError("JSON report: non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

JsonValue& JsonValue::operator[](const std::string& key) {
    if (!std::holds_alternative<Object>(value_)) value_ = Object{};
    return std::get<Object>(value_)[key];
}

void JsonValue::push_back(JsonValue v) {
    if (!std::holds_alternative<Array>(value_)) value_ = Array{};
    std::get<Array>(value_).push_back(std::move(v));
}

namespace {

void escape_string(std::string& out, const std::string& s) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void pad(std::string& out, int indent) { out.append(static_cast<std::size_t>(indent) * 2, ' '); }

}  // namespace

void JsonValue::dump_to(std::string& out, int indent) const {
    if (std::holds_alternative<std::nullptr_t>(value_)) {
        out += "null";
    } else if (std::holds_alternative<bool>(value_)) {
        out += std::get<bool>(value_) ? "true" : "false";
    } else if (std::holds_alternative<std::int64_t>(value_)) {
        out += std::to_string(std::get<std::int64_t>(value_));
    } else if (std::holds_alternative<double>(value_)) {
        out += format_double_17(std::get<double>(value_));
    } else if (std::holds_alternative<std::string>(value_)) {
        escape_string(out, std::get<std::string>(value_));
    } else if (std::holds_alternative<Array>(value_)) {
        const Array& arr = std::get<Array>(value_);
        if (arr.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < arr.size(); ++i) {
            pad(out, indent + 1);
            arr[i].dump_to(out, indent + 1);
            if (i + 1 < arr.size()) out += ',';
            out += '\n';
        }
        pad(out, indent);
        out += ']';
    } else {
        const Object& obj = std::get<Object>(value_);
        if (obj.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t i = 0;
        for (const auto& [key, val] : obj) {
            pad(out, indent + 1);
            escape_string(out, key);
            out += ": ";
            val.dump_to(out, indent + 1);
            if (++i < obj.size()) out += ',';
            out += '\n';
        }
        pad(out, indent);
        out += '}';
    }
}

std::string JsonValue::dump() const {
    std::string out;
    dump_to(out, 0);
    out += '\n';
    return out;
}

}  // namespace camfuse
