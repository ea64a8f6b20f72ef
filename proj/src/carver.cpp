// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/carver.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/parallel.hpp>
#include <algorithm>
#include <cstring>

namespace wasmdroid
{
std::string_view to_string(CarveStatus s) noexcept
{
    return s == CarveStatus::Parsed ? "Parsed" : "MagicOnly";
}

std::vector<uint64_t> scan_magic(ByteView bytes)
{
    std::vector<uint64_t> out;
    if (bytes.size() < kWasmMagic.size())
        return out;
    const auto* data = bytes.data();
    const size_t last = bytes.size() - kWasmMagic.size();
    size_t i = 0;
    while (i <= last)
    {
        const auto* hit = static_cast<const uint8_t*>(std::memchr(data + i, 0x00, last - i + 1));
        if (!hit)
            break;
        i = static_cast<size_t>(hit - data);
        if (std::memcmp(hit, kWasmMagic.data(), kWasmMagic.size()) == 0)
            out.push_back(i);
        ++i;
    }
    return out;
}

CarvedCandidate carve(ByteView bytes, uint64_t offset)
{
    CarvedCandidate c;
    c.offset = offset;
    if (offset > bytes.size())
    {
        c.failure = "offset past end of input";
        return c;
    }
    const auto slice = bytes.subspan(static_cast<size_t>(offset));
    try
    {
        auto m = parse_module(slice, ParseMode::Prefix);
        c.length = m.consumed;
        c.status = CarveStatus::Parsed;
        c.bytes.assign(slice.begin(), slice.begin() + static_cast<std::ptrdiff_t>(m.consumed));
        c.module = std::move(m);
    }
    catch (const Error& e)
    {
        c.failure = e.what();
    }
    return c;
}

namespace
{
std::vector<CarvedCandidate> carve_entry(const ApkInventory& inv, size_t idx, const CarveOptions& options)
{
    const auto& entry = inv.entries()[idx];
    std::vector<CarvedCandidate> out;
    auto stamp = [&](CarvedCandidate c, uint64_t base) {
        c.offset += base;
        c.source_path = entry.path;
        c.source_occurrence = entry.occurrence;
        c.source_class = inv.class_of(idx);
        out.push_back(std::move(c));
    };
    if (entry.uncompressed_size > options.stream_threshold)
    {
        const size_t lookahead = std::max<size_t>(options.lookahead, kWasmMagic.size() - 1);
        for_each_window(inv, idx, options.window, lookahead, [&](ByteView buffer, uint64_t base, size_t primary) {
            for (const auto off : scan_magic(buffer))
            {
                if (off < primary)
                    stamp(carve(buffer, off), base);
            }
        });
        return out;
    }
    const auto payload = entry_bytes(inv, idx);
    for (const auto off : scan_magic(payload.bytes))
        stamp(carve(payload.bytes, off), 0);
    return out;
}
}  // namespace

InventoryCarveResult scan_inventory(const ApkInventory& inv, const CarveOptions& options)
{
    const auto& entries = inv.entries();
    std::vector<std::vector<CarvedCandidate>> per_entry(entries.size());
    std::vector<std::string> errors(entries.size());
    parallel_for(entries.size(), options.jobs, [&](size_t i) {
        if (inv.class_of(i) == FileClass::UnsupportedCompression)
        {
            errors[i] = entries[i].path + ": compression method " + std::to_string(entries[i].method) +
                        " not supported, entry not carved";
            return;
        }
        try
        {
            per_entry[i] = carve_entry(inv, i, options);
        }
        catch (const Error& e)
        {
            errors[i] = entries[i].path + ": " + e.what();
        }
    });

    InventoryCarveResult result;
    for (size_t i = 0; i < entries.size(); ++i)
    {
        for (auto& c : per_entry[i])
            result.candidates.push_back(std::move(c));
        if (!errors[i].empty())
            result.warnings.push_back(std::move(errors[i]));
    }
    std::stable_sort(result.candidates.begin(), result.candidates.end(), [](const auto& a, const auto& b) {
        return std::tie(a.source_path, a.source_occurrence, a.offset) <
               std::tie(b.source_path, b.source_occurrence, b.offset);
    });
    return result;
}
}  // namespace wasmdroid
