@Deprecated
package app;
