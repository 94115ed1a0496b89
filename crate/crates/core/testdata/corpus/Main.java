import java.lang.annotation.Retention;
import java.lang.annotation.RetentionPolicy;
import java.lang.annotation.Target;

import static java.lang.annotation.ElementType.TYPE_USE;

@Retention(RetentionPolicy.CLASS)
@Target({TYPE_USE})
@interface Anno {}

public class Main {
    public <T> T[][] check(T @Anno[] @Anno [] arr) {
        if (arr == null) {
            throw new NullPointerException();
        }
        return null;
    }
}
