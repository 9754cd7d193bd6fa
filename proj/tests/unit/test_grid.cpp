#include <gtest/gtest.h>

#include <string>

#include "fracemb/grid.hpp"

using namespace fracemb;

TEST(FracOrder, AcceptsOpenUnitInterval) {
    EXPECT_DOUBLE_EQ(FracOrder(0.5).value(), 0.5);
    EXPECT_FALSE(FracOrder(0.999).is_classical());
    EXPECT_TRUE(FracOrder::classical_limit().is_classical());
    EXPECT_DOUBLE_EQ(FracOrder::classical_limit().value(), 1.0);
}

TEST(FracOrder, RejectsOutsideWithMessage) {
    for (double a : {0.0, 1.0, 1.5, -0.2}) {
        try {
            FracOrder o(a);
            ADD_FAILURE() << "accepted " << a;
        } catch (const domain_error& e) {
            EXPECT_NE(std::string(e.what()).find("alpha must lie in (0,1)"), std::string::npos);
        }
    }
}

TEST(TimeGrid, NodesAndStep) {
    const TimeGrid g(0.0, 1.0, 4);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(g.steps(), 4u);
    EXPECT_DOUBLE_EQ(g.step(), 0.25);
    EXPECT_DOUBLE_EQ(g.node(2), 0.5);
    EXPECT_EQ(g.node(4), 1.0);
    const TimeGrid odd(0.1, 0.7, 3);
    EXPECT_EQ(odd.node(3), 0.7);  // last node pinned exactly
}

TEST(TimeGrid, Validation) {
    EXPECT_THROW(TimeGrid(1.0, 1.0, 4), grid_error);
    EXPECT_THROW(TimeGrid(2.0, 1.0, 4), grid_error);
    EXPECT_THROW(TimeGrid(0.0, 1.0, 1), grid_error);
    EXPECT_NO_THROW(TimeGrid(0.0, 1.0, 2));
}

TEST(Trajectory, LayoutAndBlocks) {
    const TimeGrid g(0.0, 1.0, 2);
    Trajectory y(g, 2, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(y(1, 0), 3);
    EXPECT_EQ(y(2, 1), 6);
    EXPECT_EQ(y.component(1), (std::vector<double>{2, 4, 6}));
    const auto b = y.block(1, 1);
    EXPECT_EQ(b.dim(), 1u);
    EXPECT_EQ(b(2, 0), 6);
    const auto s = stack(y.block(0, 1), y.block(1, 1));
    EXPECT_EQ(s.values(), y.values());
    EXPECT_THROW(y.block(1, 2), mismatch_error);
    EXPECT_THROW(Trajectory(g, 2, {1, 2, 3}), mismatch_error);
    EXPECT_THROW(Trajectory(g, 0), mismatch_error);
}

TEST(Trajectory, SampleAndFiniteness) {
    const TimeGrid g(0.0, 2.0, 4);
    auto x = Trajectory::sample(g, [](double t) { return t * t; });
    EXPECT_DOUBLE_EQ(x(3, 0), 2.25);
    EXPECT_TRUE(x.all_finite());
    x(1, 0) = std::nan("");
    EXPECT_FALSE(x.all_finite());
}

TEST(Trajectory, SameGridRequirement) {
    const Trajectory a(TimeGrid(0.0, 1.0, 4), 1);
    const Trajectory b(TimeGrid(0.0, 1.0, 8), 1);
    EXPECT_THROW(require_same_grid(a, b, "test"), mismatch_error);
    EXPECT_NO_THROW(require_same_grid(a, a, "test"));
}
