#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace camfuse {

// Minimal JSON document builder for report files. Object keys serialize
// in sorted order and doubles with 17 significant digits, so identical
// inputs always produce identical bytes.
class JsonValue {
  public:
    using Array = std::vector<JsonValue>;
    using Object = std::map<std::string, JsonValue>;

    JsonValue() : value_(nullptr) {}
    JsonValue(std::nullptr_t) : value_(nullptr) {}
    JsonValue(bool b) : value_(b) {}
    JsonValue(int v) : value_(static_cast<std::int64_t>(v)) {}
    JsonValue(std::size_t v) : value_(static_cast<std::int64_t>(v)) {}
    JsonValue(std::int64_t v) : value_(v) {}
    JsonValue(double v) : value_(v) {}
    JsonValue(const char* s) : value_(std::string(s)) {}
    JsonValue(std::string s) : value_(std::move(s)) {}
    JsonValue(Array a) : value_(std::move(a)) {}
    JsonValue(Object o) : value_(std::move(o)) {}

    static JsonValue object() { return JsonValue(Object{}); }
    static JsonValue array() { return JsonValue(Array{}); }

    JsonValue& operator[](const std::string& key);
    void push_back(JsonValue v);

    // Pretty-printed with two-space indentation and a trailing newline.
    std::string dump() const;

  private:
    void dump_to(std::string& out, int indent) const;
    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object>
        value_;
};

// Locale-independent "%.17g" with a guard against non-finite values.
std::string format_double_17(double v);

}  // namespace camfuse
