#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

namespace herdsim {

struct Position {
    int x = 0;
    int y = 0;

    bool operator==(const Position& o) const { return x == o.x && y == o.y; }
    bool operator!=(const Position& o) const { return !(*this == o); }
    // Row-major order: y first, then x. Tie-break rules throughout the
    // library mean "smallest in this order" when they say row-major.
    bool operator<(const Position& o) const {
        return y != o.y ? y < o.y : x < o.x;
    }
};

inline int chebyshev(Position a, Position b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// y grows downward (row index), so North is y-1.
enum class Direction : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

struct Offset {
    int dx = 0;
    int dy = 0;
};

inline constexpr std::array<Direction, 8> all_directions{
    Direction::N, Direction::NE, Direction::E, Direction::SE,
    Direction::S, Direction::SW, Direction::W, Direction::NW};

inline Offset offset_of(Direction d) {
    switch (d) {
        case Direction::N:  return {0, -1};
        case Direction::NE: return {1, -1};
        case Direction::E:  return {1, 0};
        case Direction::SE: return {1, 1};
        case Direction::S:  return {0, 1};
        case Direction::SW: return {-1, 1};
        case Direction::W:  return {-1, 0};
        case Direction::NW: return {-1, -1};
    }
    return {0, 0};
}

inline Position moved(Position p, Direction d) {
    Offset o = offset_of(d);
    return {p.x + o.dx, p.y + o.dy};
}

inline const char* direction_name(Direction d) {
    switch (d) {
        case Direction::N:  return "n";
        case Direction::NE: return "ne";
        case Direction::E:  return "e";
        case Direction::SE: return "se";
        case Direction::S:  return "s";
        case Direction::SW: return "sw";
        case Direction::W:  return "w";
        case Direction::NW: return "nw";
    }
    return "?";
}

inline std::optional<Direction> parse_direction(const std::string& s) {
    for (Direction d : all_directions)
        if (s == direction_name(d)) return d;
    return std::nullopt;
}

// Exact one-step direction from a to b; nullopt unless Chebyshev distance is 1.
inline std::optional<Direction> direction_between(Position a, Position b) {
    if (chebyshev(a, b) != 1) return std::nullopt;
    for (Direction d : all_directions)
        if (moved(a, d) == b) return d;
    return std::nullopt;
}

struct Action {
    bool is_move = false;
    Direction dir = Direction::N;

    static Action stay() { return {}; }
    static Action move(Direction d) { return {true, d}; }

    bool operator==(const Action& o) const {
        return is_move == o.is_move && (!is_move || dir == o.dir);
    }
    bool operator!=(const Action& o) const { return !(*this == o); }
};

inline std::string action_name(Action a) {
    return a.is_move ? direction_name(a.dir) : "stay";
}

inline std::optional<Action> parse_action(const std::string& s) {
    if (s == "stay") return Action::stay();
    if (auto d = parse_direction(s)) return Action::move(*d);
    return std::nullopt;
}

}  // namespace herdsim
