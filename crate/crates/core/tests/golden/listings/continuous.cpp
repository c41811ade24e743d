// code for delayed continuous statement
for(int i=0;i<T/h;i++){
    if(N(B,e)&&N_p(B,e)){
        wait(h,SC_TU);
        x=x+h*f(x,x_r);
        wait(SC_ZERO_TIME);
    }
}
if(N(B,e)&&N_p(B,e)){
    return;
}
