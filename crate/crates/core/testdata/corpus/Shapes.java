package geometry;

public class Shapes {
    sealed interface Shape permits Circle, Square, Rect {}

    record Circle(double radius) implements Shape {
        Circle {
            if (radius < 0) {
                throw new IllegalArgumentException("radius");
            }
        }
    }

    record Square(double side) implements Shape {}

    record Rect(double w, double h) implements Shape {
        double diagonal() {
            return Math.sqrt(w * w + h * h);
        }
    }

    static double area(Shape s) {
        if (s instanceof Circle c) {
            return Math.PI * c.radius() * c.radius();
        }
        if (s instanceof Square sq) {
            return sq.side() * sq.side();
        }
        Rect r = (Rect) s;
        return r.w() * r.h();
    }

    static String describe(int sides) {
        return switch (sides) {
            case 0 -> "circle";
            case 3, 4 -> {
                String kind = sides == 3 ? "triangle" : "quad";
                yield kind;
            }
            default -> "polygon";
        };
    }
}
