package app;

import java.lang.annotation.ElementType;
import java.lang.annotation.Retention;
import java.lang.annotation.RetentionPolicy;
import java.lang.annotation.Target;

@Retention(RetentionPolicy.RUNTIME)
@Target({ElementType.TYPE, ElementType.METHOD})
@interface Tag {
    String value() default "";

    int priority() default 0;

    String[] aliases() default {};
}

@Tag("widget")
public class Widget {
    private String title;
    private int width;

    private Widget(int width) {
        this.width = width;
    }

    public static Widget of(int width) {
        return new Widget(width);
    }

    @Tag(value = "area", priority = 2)
    public int area(int height) {
        return width * height;
    }
}
